use std::fs;
use std::io::Write;
use std::path::Path;

use super::AttributedGraph;
use crate::{Error, Result};

/// Input rows dropped while building a simple graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadWarnings {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl LoadWarnings {
    pub fn total(&self) -> usize {
        self.self_loops + self.duplicates
    }
}

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Data rows as `(1-based line number, fields)`, skipping blanks and `#` comments.
pub(crate) fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| (i + 1, l.split_whitespace().collect()))
}

/// Load a graph from a nodes TSV (`id attr_1 … attr_d [label]`) and an
/// edges TSV (`src dst`). Both files start with a header row.
pub fn load_attributed_graph(
    nodes_path: &Path,
    edges_path: &Path,
) -> Result<(AttributedGraph, LoadWarnings)> {
    let parse_err = |path: &Path, line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let text = read(nodes_path)?;
    let mut it = rows(&text);
    let (hline, header) = it
        .next()
        .ok_or_else(|| parse_err(nodes_path, 1, "missing header".into()))?;
    if header.first() != Some(&"id") {
        return Err(parse_err(nodes_path, hline, "first column must be `id`".into()));
    }
    let has_label = header.last() == Some(&"label");
    let dim = header.len() - 1 - usize::from(has_label);
    if dim == 0 {
        return Err(parse_err(nodes_path, hline, "no attribute columns".into()));
    }

    let mut ids = Vec::new();
    let mut attrs = Vec::new();
    let mut labels = Vec::new();
    for (line, fields) in it {
        if fields.len() != header.len() {
            return Err(parse_err(
                nodes_path,
                line,
                format!("expected {} columns, found {}", header.len(), fields.len()),
            ));
        }
        let row = fields[1..=dim]
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(nodes_path, line, format!("non-numeric attribute `{s}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.iter().any(|x| !x.is_finite()) {
            return Err(parse_err(nodes_path, line, "non-finite attribute".into()));
        }
        if has_label {
            labels.push(match fields[dim + 1] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(parse_err(nodes_path, line, format!("label must be 0 or 1, got `{other}`")))
                }
            });
        }
        ids.push(fields[0].to_string());
        attrs.push(row);
    }
    if ids.len() < 2 {
        return Err(Error::Size(format!(
            "{} holds {} node(s), need at least 2",
            nodes_path.display(),
            ids.len()
        )));
    }
    let index: std::collections::HashMap<&str, usize> =
        ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if index.len() != ids.len() {
        return Err(parse_err(nodes_path, 0, "duplicate node ids".into()));
    }

    let text = read(edges_path)?;
    let mut it = rows(&text);
    let (hline, header) = it
        .next()
        .ok_or_else(|| parse_err(edges_path, 1, "missing header".into()))?;
    if header.len() != 2 {
        return Err(parse_err(edges_path, hline, "expected header `src dst`".into()));
    }
    let mut edges = Vec::new();
    for (line, fields) in it {
        if fields.len() != 2 {
            return Err(parse_err(
                edges_path,
                line,
                format!("expected 2 columns, found {}", fields.len()),
            ));
        }
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::UnknownNode(s.to_string()));
        edges.push((lookup(fields[0])?, lookup(fields[1])?));
    }

    let (graph, warnings) =
        AttributedGraph::with_warnings(ids, attrs, edges, has_label.then_some(labels))?;
    if warnings.total() > 0 {
        log::warn!(
            "dropped {} self-loop(s) and {} duplicate edge(s) from {}",
            warnings.self_loops,
            warnings.duplicates,
            edges_path.display()
        );
    }
    Ok((graph, warnings))
}

/// Write a graph in the same two-file format the loader reads.
///
/// Floats use Rust's shortest round-trip formatting, so reloading gives the
/// identical graph.
pub fn write_attributed_graph(
    graph: &AttributedGraph,
    nodes_path: &Path,
    edges_path: &Path,
) -> Result<()> {
    let mut out = Vec::new();
    let mut header = vec!["id".to_string()];
    header.extend((1..=graph.attribute_dim()).map(|k| format!("attr_{k}")));
    if graph.labels().is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join("\t")).unwrap();
    for u in 0..graph.node_count() {
        let mut fields = vec![graph.node_ids()[u].clone()];
        fields.extend(graph.attributes(u).iter().map(|x| format!("{x:?}")));
        if let Some(l) = graph.labels() {
            fields.push(if l[u] { "1" } else { "0" }.into());
        }
        writeln!(out, "{}", fields.join("\t")).unwrap();
    }
    fs::write(nodes_path, out).map_err(|e| Error::io(nodes_path, e))?;

    let mut out = String::from("src\tdst\n");
    for &(u, v) in graph.edges() {
        out.push_str(&graph.node_ids()[u]);
        out.push('\t');
        out.push_str(&graph.node_ids()[v]);
        out.push('\n');
    }
    fs::write(edges_path, out).map_err(|e| Error::io(edges_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_pair(nodes: &str, edges: &str) -> (tempfile::TempDir, std::path::PathBuf, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let n = dir.path().join("nodes.tsv");
        let e = dir.path().join("edges.tsv");
        fs::write(&n, nodes).unwrap();
        fs::write(&e, edges).unwrap();
        (dir, n, e)
    }

    #[test]
    fn loads_small_graph() {
        let (_d, n, e) = write_pair(
            "id\tattr_1\tattr_2\na\t0\t1\nb\t1\t1\nc\t2\t0.5\n",
            "src\tdst\na\tb\nb\tc\n",
        );
        let (g, w) = load_attributed_graph(&n, &e).unwrap();
        assert_eq!((g.node_count(), g.attribute_dim(), g.edges().len()), (3, 2, 2));
        assert_eq!(w, LoadWarnings::default());
        assert!(g.labels().is_none());
    }

    #[test]
    fn dedups_and_drops_loops() {
        let (_d, n, e) = write_pair(
            "id\tattr_1\tlabel\na\t0\t0\nb\t1\t1\n",
            "src\tdst\na\tb\nb\ta\na\ta\n",
        );
        let (g, w) = load_attributed_graph(&n, &e).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(w.self_loops, 1);
        assert_eq!(w.duplicates, 1);
        assert_eq!(g.labels(), Some(&[false, true][..]));
    }

    #[test]
    fn reports_line_numbers() {
        let (_d, n, e) = write_pair("id\tattr_1\na\t0\nb\tx\n", "src\tdst\n");
        match load_attributed_graph(&n, &e) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let (_d, n, e) = write_pair("id\tattr_1\na\t0\nb\n", "src\tdst\n");
        assert!(matches!(load_attributed_graph(&n, &e), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn unknown_ids_and_tiny_graphs() {
        let (_d, n, e) = write_pair("id\tattr_1\na\t0\nb\t1\n", "src\tdst\na\tz\n");
        assert!(matches!(load_attributed_graph(&n, &e), Err(Error::UnknownNode(id)) if id == "z"));
        let (_d, n, e) = write_pair("id\tattr_1\na\t0\n", "src\tdst\n");
        assert!(matches!(load_attributed_graph(&n, &e), Err(Error::Size(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn write_then_load_round_trips(
            attrs in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 2), 2..12),
            raw_edges in prop::collection::vec((0usize..12, 0usize..12), 0..30),
            with_labels in any::<bool>(),
        ) {
            let n = attrs.len();
            let edges: Vec<_> = raw_edges.into_iter().map(|(u, v)| (u % n, v % n)).collect();
            let labels = with_labels.then(|| (0..n).map(|i| i % 3 == 0).collect());
            let g = AttributedGraph::new((0..n).map(|i| format!("v{i}")).collect(), attrs, edges, labels).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let (np, ep) = (dir.path().join("n.tsv"), dir.path().join("e.tsv"));
            write_attributed_graph(&g, &np, &ep).unwrap();
            let (back, _) = load_attributed_graph(&np, &ep).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
