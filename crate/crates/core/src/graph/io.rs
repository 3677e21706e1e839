//! CSV ingestion/export.
//!
//! vertices: `id,type,props`, edges: `id,src,dst,label,props`; `props` is a
//! JSON object string or empty.

use std::fs::File;
use std::path::Path;

use super::{GraphError, GraphSchema, Properties, PropertyGraph, PropertyValue};

/// File names used inside a graph directory.
pub const GRAPH_FILES: (&str, &str, &str) = ("vertices.csv", "edges.csv", "schema.json");

fn io_err(path: &Path, e: impl std::fmt::Display) -> GraphError {
    GraphError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn at_line(path: &Path, line: usize, e: GraphError) -> GraphError {
    GraphError::AtLine {
        path: path.display().to_string(),
        line,
        source: Box::new(e),
    }
}

pub(crate) fn parse_props(text: &str) -> Result<Properties, GraphError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Properties::new());
    }
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| GraphError::MalformedRow(format!("props: {e}")))?;
    let serde_json::Value::Object(map) = value else {
        return Err(GraphError::MalformedRow("props must be a JSON object".into()));
    };
    let mut props = Properties::new();
    for (k, v) in map {
        let pv = match v {
            serde_json::Value::Bool(b) => PropertyValue::Bool(b),
            serde_json::Value::String(s) => PropertyValue::Str(s),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) => PropertyValue::Int(i),
                None => PropertyValue::Float(
                    n.as_f64()
                        .ok_or_else(|| GraphError::MalformedRow(format!("property '{k}': unsupported number")))?,
                ),
            },
            other => {
                return Err(GraphError::MalformedRow(format!(
                    "property '{k}': unsupported value {other}"
                )))
            }
        };
        props.insert(k, pv);
    }
    Ok(props)
}

pub(crate) fn render_props(props: &Properties) -> String {
    if props.is_empty() {
        String::new()
    } else {
        serde_json::to_string(props).expect("properties serialize")
    }
}

fn reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>, GraphError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let found: Vec<String> = rdr
        .headers()
        .map_err(|e| io_err(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if found != header {
        return Err(at_line(
            path,
            1,
            GraphError::MalformedRow(format!(
                "expected header {}, found {}",
                header.join(","),
                found.join(",")
            )),
        ));
    }
    Ok(rdr)
}

/// Load a graph from vertex and edge CSV files; the whole load fails on the
/// first violating row, reporting its line number.
pub fn load_graph(vertex_file: &Path, edge_file: &Path, schema: GraphSchema) -> Result<PropertyGraph, GraphError> {
    let mut g = PropertyGraph::new(schema);

    let mut rdr = reader(vertex_file, &["id", "type", "props"])?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(vertex_file, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut row = || -> Result<(), GraphError> {
            if rec.len() != 3 {
                return Err(GraphError::MalformedRow(format!(
                    "expected 3 fields, found {}",
                    rec.len()
                )));
            }
            let id = rec[0].trim();
            if id.is_empty() {
                return Err(GraphError::MalformedRow("empty vertex id".into()));
            }
            g.add_vertex(id, rec[1].trim(), parse_props(&rec[2])?)?;
            Ok(())
        };
        row().map_err(|e| at_line(vertex_file, line, e))?;
    }

    let mut rdr = reader(edge_file, &["id", "src", "dst", "label", "props"])?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(edge_file, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut row = || -> Result<(), GraphError> {
            if rec.len() != 5 {
                return Err(GraphError::MalformedRow(format!(
                    "expected 5 fields, found {}",
                    rec.len()
                )));
            }
            let id = rec[0].trim();
            if id.is_empty() {
                return Err(GraphError::MalformedRow("empty edge id".into()));
            }
            g.add_edge(id, rec[1].trim(), rec[2].trim(), rec[3].trim(), parse_props(&rec[4])?)?;
            Ok(())
        };
        row().map_err(|e| at_line(edge_file, line, e))?;
    }
    Ok(g)
}

pub fn save_graph(g: &PropertyGraph, vertex_file: &Path, edge_file: &Path) -> Result<(), GraphError> {
    let mut w = csv::Writer::from_path(vertex_file).map_err(|e| io_err(vertex_file, e))?;
    w.write_record(["id", "type", "props"])
        .map_err(|e| io_err(vertex_file, e))?;
    for v in g.vertex_ids() {
        w.write_record([g.vertex_key(v), g.vertex_type(v), &render_props(g.vertex_props(v))])
            .map_err(|e| io_err(vertex_file, e))?;
    }
    w.flush().map_err(|e| io_err(vertex_file, e))?;

    let mut w = csv::Writer::from_path(edge_file).map_err(|e| io_err(edge_file, e))?;
    w.write_record(["id", "src", "dst", "label", "props"])
        .map_err(|e| io_err(edge_file, e))?;
    for e in g.edge_ids() {
        w.write_record([
            g.edge_key(e),
            g.vertex_key(g.edge_src(e)),
            g.vertex_key(g.edge_dst(e)),
            g.edge_label(e),
            &render_props(g.edge_props(e)),
        ])
        .map_err(|err| io_err(edge_file, err))?;
    }
    w.flush().map_err(|e| io_err(edge_file, e))
}

/// Load `vertices.csv`, `edges.csv` and `schema.json` from a directory.
pub fn load_graph_dir(dir: &Path) -> Result<PropertyGraph, GraphError> {
    let (v, e, s) = GRAPH_FILES;
    let schema_path = dir.join(s);
    let text = std::fs::read_to_string(&schema_path).map_err(|err| io_err(&schema_path, err))?;
    let schema = GraphSchema::from_json(&text)?;
    load_graph(&dir.join(v), &dir.join(e), schema)
}

pub fn save_graph_dir(g: &PropertyGraph, dir: &Path) -> Result<(), GraphError> {
    let (v, e, s) = GRAPH_FILES;
    std::fs::create_dir_all(dir).map_err(|err| io_err(dir, err))?;
    let schema_path = dir.join(s);
    std::fs::write(&schema_path, g.schema().to_json()).map_err(|err| io_err(&schema_path, err))?;
    save_graph(g, &dir.join(v), &dir.join(e))
}
