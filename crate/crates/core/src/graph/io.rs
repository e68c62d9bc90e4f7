//! Edge-list and contact-record text formats.
//!
//! Edge lists hold one unordered pair per line, separated by whitespace or a
//! comma. Lines starting with `#` are comments, except a leading `# nodes N`
//! header, which pre-registers labels `0..N` so isolated nodes survive a
//! write/read round trip.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

/// A graph together with the original label of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactRecord {
    pub a: String,
    pub b: String,
    pub count: u64,
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, usize>,
    labels: Vec<String>,
}

impl Interner {
    fn id(&mut self, label: &str) -> usize {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.ids.insert(label.to_owned(), id);
        self.labels.push(label.to_owned());
        id
    }
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

fn nodes_header(line: &str) -> Option<usize> {
    let rest = line.strip_prefix('#')?.trim();
    let n = rest.strip_prefix("nodes")?.trim();
    n.parse().ok()
}

/// Parses edge-list text. `origin` only labels error messages.
pub fn parse_edge_list(text: &str, origin: &Path) -> Result<LabeledGraph> {
    let mut names = Interner::default();
    let mut pairs = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if !seen_content {
                if let Some(n) = nodes_header(line) {
                    for i in 0..n {
                        names.id(&i.to_string());
                    }
                }
            }
            seen_content = true;
            continue;
        }
        seen_content = true;
        let toks: Vec<&str> = tokens(line).collect();
        if toks.len() != 2 {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: idx + 1,
                msg: format!("expected 2 labels, found {}", toks.len()),
            });
        }
        let (u, v) = (names.id(toks[0]), names.id(toks[1]));
        pairs.push((u, v));
    }
    let mut graph = Graph::with_nodes(names.labels.len());
    for (u, v) in pairs {
        graph.insert(u, v);
    }
    Ok(LabeledGraph {
        graph,
        labels: names.labels,
    })
}

pub fn load_labeled_edge_list(path: impl AsRef<Path>) -> Result<LabeledGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    load_labeled_edge_list(path).map(|l| l.graph)
}

/// Writes `g` with a `# nodes N` header and one `u v` line per edge, sorted.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# nodes {}", g.node_count())?;
    for (u, v) in g.sorted_edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_edge_list(g, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Parses contact lines `a b count`, or `a b` with an implied count of 1.
pub fn parse_contacts(text: &str, origin: &Path) -> Result<Vec<ContactRecord>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            msg,
        };
        let toks: Vec<&str> = tokens(line).collect();
        let count = match toks.len() {
            2 => 1,
            3 => toks[2]
                .parse::<u64>()
                .map_err(|e| err(format!("bad count {:?}: {e}", toks[2])))?,
            n => return Err(err(format!("expected 2 or 3 fields, found {n}"))),
        };
        if count == 0 {
            return Err(err("count must be positive".into()));
        }
        if toks[0] == toks[1] {
            continue;
        }
        out.push(ContactRecord {
            a: toks[0].to_owned(),
            b: toks[1].to_owned(),
            count,
        });
    }
    Ok(out)
}

pub fn load_contacts(path: impl AsRef<Path>) -> Result<Vec<ContactRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_contacts(&text, path)
}

/// Collapses contact records into an unweighted graph: a pair becomes an edge
/// once its summed count reaches `min_count`. Every label becomes a node.
pub fn flatten_contacts(records: &[ContactRecord], min_count: u64) -> LabeledGraph {
    assert!(min_count >= 1, "min_count must be positive");
    let mut names = Interner::default();
    let mut totals: HashMap<(usize, usize), u64> = HashMap::new();
    let mut order = Vec::new();
    for r in records {
        let (a, b) = (names.id(&r.a), names.id(&r.b));
        if a == b {
            continue;
        }
        let k = (a.min(b), a.max(b));
        let slot = totals.entry(k).or_insert_with(|| {
            order.push(k);
            0
        });
        *slot += r.count;
    }
    let mut graph = Graph::with_nodes(names.labels.len());
    for k in order {
        if totals[&k] >= min_count {
            graph.insert(k.0, k.1);
        }
    }
    LabeledGraph {
        graph,
        labels: names.labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LabeledGraph> {
        parse_edge_list(text, Path::new("test.edges"))
    }

    fn rec(a: &str, b: &str, count: u64) -> ContactRecord {
        ContactRecord {
            a: a.into(),
            b: b.into(),
            count,
        }
    }

    #[test]
    fn two_lines_three_nodes() {
        let g = parse("a b\nb c\n").unwrap();
        assert_eq!(g.graph.node_count(), 3);
        assert_eq!(g.graph.edge_count(), 2);
        assert_eq!(g.labels, ["a", "b", "c"]);
    }

    #[test]
    fn duplicates_and_loops_dropped() {
        let g = parse("a b\nb a\na a\n").unwrap();
        assert_eq!(g.graph.node_count(), 2);
        assert_eq!(g.graph.edge_count(), 1);
        g.graph.check_simple().unwrap();
    }

    #[test]
    fn empty_and_comments() {
        let g = parse("").unwrap();
        assert!(g.graph.is_empty());
        let g = parse("# hello\n\n  # another\nx,y\n").unwrap();
        assert_eq!(g.graph.edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse("a b\nc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("a b c\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn nodes_header_keeps_isolated_nodes() {
        let g = Graph::from_edges(6, [(3, 1), (0, 5)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.graph, g);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_edge_list("/nonexistent/edges.txt"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn contacts_threshold() {
        let g = flatten_contacts(&[rec("a", "b", 6)], 6);
        assert!(g.graph.has_edge(0, 1));
        let g = flatten_contacts(&[rec("a", "b", 5)], 6);
        assert_eq!(g.graph.node_count(), 2);
        assert_eq!(g.graph.edge_count(), 0);
        let g = flatten_contacts(&[rec("a", "b", 3), rec("b", "a", 3)], 6);
        assert!(g.graph.has_edge(0, 1));
    }

    #[test]
    fn contact_lines() {
        let recs = parse_contacts("a b 4\na b\n# x\nc,d,2\n", Path::new("c")).unwrap();
        assert_eq!(
            recs,
            vec![rec("a", "b", 4), rec("a", "b", 1), rec("c", "d", 2)]
        );
        assert!(parse_contacts("a b 0\n", Path::new("c")).is_err());
        assert!(parse_contacts("a b x\n", Path::new("c")).is_err());
    }
}
