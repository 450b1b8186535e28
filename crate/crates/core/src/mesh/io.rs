//! Line-oriented ASCII mesh format.
//!
//! ```text
//! # comment
//! mesh <dim> <nnode> <nelem>
//! nodes
//! x y [z]                      (nnode lines)
//! elements <TYPE> <count>      (one section per group)
//! n1 n2 ...                    (1-based node indices)
//! boundary <count>             (optional)
//! <owner> <n> <node...>        (1-based owner element and nodes)
//! ```

use std::io::{BufRead, Write};

use super::{BoundaryFace, ElementGroup, ElementType, Mesh};
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> std::io::Result<()> {
    writeln!(out, "mesh {} {} {}", mesh.dim(), mesh.nnode(), mesh.nelem())?;
    writeln!(out, "nodes")?;
    for p in mesh.coords().chunks_exact(mesh.dim()) {
        let line: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    for g in mesh.groups() {
        writeln!(out, "elements {} {}", g.kind, g.nelem())?;
        for e in g.elements() {
            let line: Vec<String> = e.iter().map(|n| (n + 1).to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
    }
    let faces = mesh.boundary_faces();
    if !faces.is_empty() {
        writeln!(out, "boundary {}", faces.len())?;
        for f in faces {
            write!(out, "{} {}", f.owner + 1, f.nodes.len())?;
            for n in &f.nodes {
                write!(out, " {}", n + 1)?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn mesh_to_string(mesh: &Mesh) -> String {
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("mesh text is ASCII")
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-empty line with comments stripped.
    fn next_content(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            self.number += 1;
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if !content.is_empty() {
                return Ok(Some((self.number, content.to_string())));
            }
        }
        Ok(None)
    }

    fn expect_content(&mut self, what: &str) -> Result<(usize, String)> {
        self.next_content()?.ok_or_else(|| Error::Parse {
            line: self.number + 1,
            msg: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn parse_index(tok: &str, line: usize, bound: usize, what: &str) -> Result<usize> {
    let v: usize = parse_num(tok, line, what)?;
    if v == 0 || v > bound {
        return Err(parse_err(line, format!("{what} {v} out of range 1..={bound}")));
    }
    Ok(v - 1)
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<Mesh> {
    let mut lines = Lines {
        inner: input.lines(),
        number: 0,
    };

    let (ln, header) = lines.expect_content("mesh header")?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 4 || tok[0] != "mesh" {
        return Err(parse_err(ln, "expected `mesh <dim> <nnode> <nelem>`"));
    }
    let dim: usize = parse_num(tok[1], ln, "dimension")?;
    if dim != 2 && dim != 3 {
        return Err(parse_err(ln, format!("dimension must be 2 or 3, got {dim}")));
    }
    let nnode: usize = parse_num(tok[2], ln, "node count")?;
    let nelem: usize = parse_num(tok[3], ln, "element count")?;

    let (ln, section) = lines.expect_content("`nodes`")?;
    if section != "nodes" {
        return Err(parse_err(ln, format!("expected `nodes`, found `{section}`")));
    }
    let mut coords = Vec::with_capacity(nnode * dim);
    for _ in 0..nnode {
        let (ln, l) = lines.expect_content("node coordinates")?;
        let vals: Vec<&str> = l.split_whitespace().collect();
        if vals.len() != dim {
            return Err(parse_err(ln, format!("expected {dim} coordinates, found {}", vals.len())));
        }
        for v in vals {
            coords.push(parse_num::<f64>(v, ln, "coordinate")?);
        }
    }

    let mut groups = Vec::new();
    let mut boundary = Vec::new();
    let mut seen_elems = 0usize;
    while let Some((ln, l)) = lines.next_content()? {
        let tok: Vec<&str> = l.split_whitespace().collect();
        match tok.first().copied() {
            Some("elements") if tok.len() == 3 => {
                let kind: ElementType = tok[1]
                    .parse()
                    .map_err(|_| parse_err(ln, format!("unknown element keyword `{}`", tok[1])))?;
                if kind.dim() != dim {
                    return Err(parse_err(ln, format!("{kind} elements in a {dim}D mesh")));
                }
                let count: usize = parse_num(tok[2], ln, "element count")?;
                let mut conn = Vec::with_capacity(count * kind.nnodes());
                for _ in 0..count {
                    let (ln, l) = lines.expect_content("element connectivity")?;
                    let ids: Vec<&str> = l.split_whitespace().collect();
                    if ids.len() != kind.nnodes() {
                        return Err(parse_err(
                            ln,
                            format!("{kind} needs {} nodes, found {}", kind.nnodes(), ids.len()),
                        ));
                    }
                    for id in ids {
                        conn.push(parse_index(id, ln, nnode, "node index")?);
                    }
                }
                seen_elems += count;
                groups.push(ElementGroup::new(kind, conn));
            }
            Some("boundary") if tok.len() == 2 => {
                let count: usize = parse_num(tok[1], ln, "face count")?;
                for _ in 0..count {
                    let (ln, l) = lines.expect_content("boundary face")?;
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() < 2 {
                        return Err(parse_err(ln, "expected `<owner> <n> <node...>`"));
                    }
                    let owner = parse_index(f[0], ln, nelem, "owner element")?;
                    let n: usize = parse_num(f[1], ln, "face node count")?;
                    if f.len() != n + 2 {
                        return Err(parse_err(ln, format!("face declares {n} nodes, found {}", f.len() - 2)));
                    }
                    let nodes = f[2..]
                        .iter()
                        .map(|t| parse_index(t, ln, nnode, "node index"))
                        .collect::<Result<Vec<_>>>()?;
                    boundary.push(BoundaryFace { nodes, owner });
                }
            }
            _ => return Err(parse_err(ln, format!("unexpected line `{l}`"))),
        }
    }
    if seen_elems != nelem {
        return Err(parse_err(
            lines.number,
            format!("header declares {nelem} elements, sections hold {seen_elems}"),
        ));
    }
    Mesh::new(dim, coords, groups, boundary).map_err(|e| parse_err(lines.number, e.to_string()))
}
