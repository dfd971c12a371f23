//! Text formats: edge lists, GraphML, flat `key = value` configs and result tables.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::calendar::Month;
use crate::error::{Error, Result};
use crate::filtgraph::{FilteredGraph, GraphKind};
use crate::mapeq::Partition;
use crate::netinfo::LinkMIResult;

fn io_err(e: std::io::Error) -> Error {
    Error::io("<output>", e)
}

/// Writes `labelA,labelB,weight` rows sorted by `(i, j)`, preceded by `# kind:` and
/// `# vertices:` comment lines that carry the full vertex set.
pub fn write_edgelist<W: Write>(mut w: W, graph: &FilteredGraph) -> Result<()> {
    writeln!(w, "# kind: {}", graph.kind()).map_err(io_err)?;
    writeln!(w, "# vertices: {}", graph.labels().join(",")).map_err(io_err)?;
    for e in graph.edges() {
        writeln!(w, "{},{},{}", graph.labels()[e.i], graph.labels()[e.j], e.weight).map_err(io_err)?;
    }
    Ok(())
}

/// Reads an edge list. Without a `# vertices:` line the vertex set is the labels in order
/// of first appearance.
pub fn read_edgelist<R: BufRead>(r: R) -> Result<FilteredGraph> {
    let mut labels: Option<Vec<String>> = None;
    let mut kind = GraphKind::Other;
    let mut edges = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<edgelist>", e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("vertices:") {
                labels = Some(v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect());
            } else if let Some(v) = comment.strip_prefix("kind:") {
                kind = match v.trim() {
                    "MST" => GraphKind::Mst,
                    "PMFG" => GraphKind::Pmfg,
                    _ => GraphKind::Other,
                };
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: k + 1,
                message: format!("expected labelA,labelB,weight, got {line:?}"),
            });
        }
        let weight = fields[2].parse::<f64>().map_err(|e| Error::Parse {
            line: k + 1,
            message: format!("bad weight {:?}: {e}", fields[2]),
        })?;
        edges.push((fields[0].to_string(), fields[1].to_string(), weight));
    }
    let labels = labels.unwrap_or_else(|| {
        let mut seen = Vec::new();
        for (a, b, _) in &edges {
            for l in [a, b] {
                if !seen.contains(l) {
                    seen.push(l.clone());
                }
            }
        }
        seen
    });
    FilteredGraph::from_labelled_edges(labels, &edges, kind)
}

pub fn read_edgelist_file(path: &Path) -> Result<FilteredGraph> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_edgelist(std::io::BufReader::new(f))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Undirected GraphML with a `weight` edge attribute.
pub fn write_graphml<W: Write>(mut w: W, graph: &FilteredGraph) -> Result<()> {
    let labels = graph.labels();
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"kind\" for=\"graph\" attr.name=\"kind\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    s.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    s.push_str(&format!("    <data key=\"kind\">{}</data>\n", graph.kind()));
    for l in labels {
        s.push_str(&format!("    <node id=\"{}\"/>\n", xml_escape(l)));
    }
    for e in graph.edges() {
        s.push_str(&format!(
            "    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{}</data></edge>\n",
            xml_escape(&labels[e.i]),
            xml_escape(&labels[e.j]),
            e.weight
        ));
    }
    s.push_str("  </graph>\n</graphml>\n");
    w.write_all(s.as_bytes()).map_err(io_err)
}

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: k + 1,
            message: format!("expected key = value, got {line:?}"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: k + 1,
                message: "empty key".into(),
            });
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Parse {
                line: k + 1,
                message: format!("duplicate key {key:?}"),
            });
        }
    }
    Ok(out)
}

/// Event annotations as `month,label` lines; an optional `month,label` header is skipped.
pub fn parse_events(text: &str) -> Result<Vec<(Month, String)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (k == 0 && line == "month,label") {
            continue;
        }
        let (m, label) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: k + 1,
            message: format!("expected month,label, got {line:?}"),
        })?;
        let month = m.parse::<Month>().map_err(|e| Error::Parse {
            line: k + 1,
            message: e.to_string(),
        })?;
        out.push((month, label.trim().to_string()));
    }
    Ok(out)
}

/// Comma-separated list of positive numbers, e.g. `0.25,0.5,1`.
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad number {s:?}: {e}")))
        })
        .collect()
}

/// `month,n1,n2,n12,I_nats,i_normalized,degenerate`; the normalized column is empty when
/// either graph has zero link entropy.
pub fn write_mi_table<W: Write>(writer: W, rows: &[(Month, LinkMIResult)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["month", "n1", "n2", "n12", "I_nats", "i_normalized", "degenerate"])?;
    for (month, r) in rows {
        w.write_record([
            month.to_string(),
            r.n1.to_string(),
            r.n2.to_string(),
            r.n12.to_string(),
            r.mutual_information.to_string(),
            r.normalized.map_or(String::new(), |v| v.to_string()),
            r.is_degenerate().to_string(),
        ])?;
    }
    w.flush().map_err(io_err)
}

/// `label,module,flow_rank` rows followed by a `# codelength_bits=... n_modules=...` line.
pub fn write_partition<W: Write>(mut writer: W, labels: &[String], partition: &Partition) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut writer);
        w.write_record(["label", "module", "flow_rank"])?;
        for v in partition.vertex_order() {
            w.write_record([
                labels[v].clone(),
                partition.assignment[v].to_string(),
                partition.flow_rank[v].to_string(),
            ])?;
        }
        w.flush().map_err(io_err)?;
    }
    writeln!(
        writer,
        "# codelength_bits={} n_modules={}",
        partition.codelength, partition.n_modules
    )
    .map_err(io_err)
}

/// `month,<label1>,...` with one row of vertex degrees per month.
pub fn write_degree_profile<W: Write>(writer: W, columns: &[String], rows: &[(Month, Vec<usize>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["month".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for (month, degrees) in rows {
        let mut row = vec![month.to_string()];
        row.extend(degrees.iter().map(usize::to_string));
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err)
}
