//! Text formats: whitespace edge lists, Matrix Market symmetric coordinate
//! files, and one-value-per-line vectors.
//!
//! Edge lists hold one `i j w` row per line with 0-based ids. Lines starting
//! with `#` are comments, except that `# nodes N` fixes the node count so that
//! isolated trailing nodes survive a round trip.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::sdd::SddMatrix;

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, "not a file path"))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{file_name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn parse_edge_list(text: &str) -> Result<WeightedGraph> {
    let mut rows = Vec::new();
    let mut declared_n: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut it = comment.split_whitespace();
            if it.next() == Some("nodes") {
                let n = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        msg: "expected '# nodes <count>'".into(),
                    })?;
                declared_n = Some(n);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 3 fields 'i j w', found {}", fields.len()),
            });
        }
        let id = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid node id '{s}'"),
            })
        };
        let w = fields[2].parse::<f64>().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid weight '{}'", fields[2]),
        })?;
        rows.push((id(fields[0])?, id(fields[1])?, w));
    }
    let inferred = rows
        .iter()
        .map(|&(i, j, _)| i.max(j) + 1)
        .max()
        .unwrap_or(0);
    let n = match declared_n {
        Some(n) if n < inferred => {
            return Err(Error::FormatViolation(format!(
                "declared {n} nodes but edges reference node {}",
                inferred - 1
            )))
        }
        Some(n) => n,
        None => inferred,
    };
    WeightedGraph::with_nodes(n, &rows)
}

pub fn format_edge_list(g: &WeightedGraph) -> String {
    let mut out = format!("# nodes {}\n", g.n());
    for (i, j, w) in g.edges() {
        writeln!(out, "{i} {j} {w}").expect("writing to a String");
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    parse_edge_list(&read_to_string(path.as_ref())?)
}

pub fn write_graph(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), format_edge_list(g).as_bytes())
}

const MM_HEADER: &str = "%%MatrixMarket matrix coordinate real symmetric";

/// Parses a Matrix Market `coordinate real symmetric` file. Indices are
/// 1-based in the file and 0-based in the result.
pub fn parse_matrix_market(text: &str) -> Result<SddMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::FormatViolation("empty Matrix Market file".into()))?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() != 5
        || tokens[0] != "%%matrixmarket"
        || tokens[1] != "matrix"
        || tokens[2] != "coordinate"
        || !(tokens[3] == "real" || tokens[3] == "integer")
        || tokens[4] != "symmetric"
    {
        return Err(Error::FormatViolation(format!(
            "expected header '{MM_HEADER}'"
        )));
    }
    let mut size: Option<(usize, usize)> = None;
    let mut entries = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_idx = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid integer '{s}'"),
            })
        };
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "expected size line 'rows cols nnz'".into(),
                    });
                }
                let (r, c, nnz) = (
                    parse_idx(fields[0])?,
                    parse_idx(fields[1])?,
                    parse_idx(fields[2])?,
                );
                if r != c {
                    return Err(Error::FormatViolation(format!(
                        "matrix is {r}x{c}, not square"
                    )));
                }
                size = Some((r, nnz));
                entries.reserve(nnz);
            }
            Some((n, _)) => {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "expected entry line 'i j value'".into(),
                    });
                }
                let (i, j) = (parse_idx(fields[0])?, parse_idx(fields[1])?);
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("index ({i}, {j}) outside 1..={n}"),
                    });
                }
                let v = fields[2].parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid value '{}'", fields[2]),
                })?;
                entries.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| Error::FormatViolation("missing size line".into()))?;
    if entries.len() != nnz {
        return Err(Error::FormatViolation(format!(
            "size line announces {nnz} entries, found {}",
            entries.len()
        )));
    }
    SddMatrix::from_entries(n, &entries)
}

/// Lower-triangle Matrix Market text for `g`.
pub fn format_matrix_market(g: &SddMatrix) -> String {
    let entries = g.upper_entries();
    let mut out = format!("{MM_HEADER}\n{} {} {}\n", g.n(), g.n(), entries.len());
    for (i, j, v) in entries {
        writeln!(out, "{} {} {v}", j + 1, i + 1).expect("writing to a String");
    }
    out
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SddMatrix> {
    parse_matrix_market(&read_to_string(path.as_ref())?)
}

pub fn write_matrix_market(g: &SddMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), format_matrix_market(g).as_bytes())
}

/// Reads one real per non-empty line.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(idx, l)| {
            l.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("invalid number '{}'", l.trim()),
            })
        })
        .collect()
}

pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(v.len() * 20);
    for x in v {
        writeln!(out, "{x}").expect("writing to a String");
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_grid2d;
    use proptest::prelude::*;

    #[test]
    fn parses_path_graph() {
        let g = parse_edge_list("0 1 1.0\n1 2 1.0\n").unwrap();
        assert_eq!(
            g,
            WeightedGraph::from_edge_list(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
        );
    }

    #[test]
    fn comments_and_node_count() {
        let g = parse_edge_list("# a comment\n# nodes 5\n\n0 1 2.5\n").unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.num_edges(), 1);
        assert!(matches!(
            parse_edge_list("# nodes 1\n0 1 1\n"),
            Err(Error::FormatViolation(_))
        ));
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        assert!(matches!(
            parse_edge_list("0 x 1.0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 1\n1 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 abc\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 -1\n"),
            Err(Error::NegativeWeight { .. })
        ));
    }

    #[test]
    fn grid_round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.tsv");
        let g = gen_grid2d(2, 2).unwrap();
        write_graph(&g, &path).unwrap();
        assert_eq!(read_graph(&path).unwrap(), g);
        assert!(matches!(
            read_graph(dir.path().join("missing")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn matrix_market_reading() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 5\n1 1 3\n2 1 1\n3 1 -1\n2 2 2\n3 3 2\n";
        let g = parse_matrix_market(text).unwrap();
        assert_eq!(g.diag(), &[3.0, 2.0, 2.0]);
        assert_eq!(g.row(0), &[(1, 1.0), (2, -1.0)]);
        assert_eq!(parse_matrix_market(&format_matrix_market(&g)).unwrap(), g);

        let general = "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n";
        assert!(matches!(
            parse_matrix_market(general),
            Err(Error::FormatViolation(_))
        ));
        let short = "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1\n2 2 1\n";
        assert!(matches!(
            parse_matrix_market(short),
            Err(Error::FormatViolation(_))
        ));
        let bad = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1\n";
        assert!(matches!(
            parse_matrix_market(bad),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    proptest! {
        #[test]
        fn edge_list_round_trip(n in 1usize..30, raw in proptest::collection::vec((0usize..30, 0usize..30, 1e-3f64..1e3), 0..60)) {
            let mut seen = std::collections::HashSet::new();
            let rows: Vec<_> = raw
                .into_iter()
                .map(|(i, j, w)| (i % n, j % n, w))
                .filter(|&(i, j, _)| i != j && seen.insert((i.min(j), i.max(j))))
                .collect();
            let g = WeightedGraph::with_nodes(n, &rows).unwrap();
            prop_assert_eq!(parse_edge_list(&format_edge_list(&g)).unwrap(), g);
        }
    }
}
