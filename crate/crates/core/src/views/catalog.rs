//! On-disk store of materialized views: `manifest.json` at the root and one
//! graph directory per view.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ViewInstance;
use crate::graph::{load_graph_dir, save_graph_dir, PropertyGraph, GRAPH_FILES};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("corrupt catalog: {0}")]
    CorruptCatalog(String),
    #[error("no view '{0}' in the catalog")]
    UnknownView(String),
    #[error("catalog i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub instance: ViewInstance,
    pub estimated_edges: f64,
    pub actual_vertices: u64,
    pub actual_edges: u64,
    /// Seconds since the Unix epoch.
    pub created: u64,
    /// Directory relative to the catalog root.
    pub dir: String,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub views: Vec<CatalogEntry>,
}

#[derive(Debug)]
pub struct ViewCatalog {
    root: PathBuf,
    manifest: Manifest,
}

fn dir_name(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.+".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl ViewCatalog {
    /// Opens the catalog at `root`, creating an empty one if none exists.
    pub fn open_or_create(root: &Path) -> Result<ViewCatalog, CatalogError> {
        if root.join(MANIFEST).exists() {
            return ViewCatalog::open(root);
        }
        std::fs::create_dir_all(root).map_err(|e| CatalogError::Io(format!("{}: {e}", root.display())))?;
        let cat = ViewCatalog {
            root: root.to_path_buf(),
            manifest: Manifest::default(),
        };
        cat.write_manifest()?;
        Ok(cat)
    }

    pub fn open(root: &Path) -> Result<ViewCatalog, CatalogError> {
        let path = root.join(MANIFEST);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CatalogError::CorruptCatalog(format!("{}: {e}", path.display())))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| CatalogError::CorruptCatalog(format!("{}: {e}", path.display())))?;
        for entry in &manifest.views {
            for f in &entry.files {
                let p = root.join(&entry.dir).join(f);
                if !p.is_file() {
                    return Err(CatalogError::CorruptCatalog(format!("missing {}", p.display())));
                }
            }
        }
        Ok(ViewCatalog {
            root: root.to_path_buf(),
            manifest,
        })
    }

    fn write_manifest(&self) -> Result<(), CatalogError> {
        let path = self.root.join(MANIFEST);
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(&path, text).map_err(|e| CatalogError::Io(format!("{}: {e}", path.display())))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.manifest.views
    }

    pub fn get(&self, id: &str) -> Option<&CatalogEntry> {
        self.manifest.views.iter().find(|e| e.id == id)
    }

    /// Stores `graph` as the materialization of `instance`, replacing any
    /// previous entry with the same id.
    pub fn insert(
        &mut self,
        instance: &ViewInstance,
        estimated_edges: f64,
        graph: &PropertyGraph,
    ) -> Result<&CatalogEntry, CatalogError> {
        let id = instance.id();
        let dir = dir_name(&id);
        save_graph_dir(graph, &self.root.join(&dir)).map_err(|e| CatalogError::Io(e.to_string()))?;
        let (v, e, s) = GRAPH_FILES;
        let entry = CatalogEntry {
            id: id.clone(),
            instance: instance.clone(),
            estimated_edges,
            actual_vertices: graph.vertex_count() as u64,
            actual_edges: graph.edge_count() as u64,
            created: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            dir,
            files: vec![v.to_string(), e.to_string(), s.to_string()],
        };
        self.manifest.views.retain(|x| x.id != id);
        self.manifest.views.push(entry);
        self.manifest.views.sort_by(|a, b| a.id.cmp(&b.id));
        self.write_manifest()?;
        Ok(self.get(&id).unwrap())
    }

    pub fn load_view(&self, id: &str) -> Result<PropertyGraph, CatalogError> {
        let entry = self.get(id).ok_or_else(|| CatalogError::UnknownView(id.to_string()))?;
        let dir = self.root.join(&entry.dir);
        let g = load_graph_dir(&dir).map_err(|e| CatalogError::CorruptCatalog(e.to_string()))?;
        if g.edge_count() as u64 != entry.actual_edges || g.vertex_count() as u64 != entry.actual_vertices {
            return Err(CatalogError::CorruptCatalog(format!(
                "{id}: size differs from manifest"
            )));
        }
        Ok(g)
    }
}
