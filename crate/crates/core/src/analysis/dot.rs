//! Graphviz export.

use std::fmt::Write as _;

use super::{active_nodes, connections};
use crate::brain::Brain;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DotMode {
    /// Buffer at t, the gates, buffer at t+1.
    Layered,
    /// Active nodes only, one edge per unique connection.
    Condensed,
}

impl std::str::FromStr for DotMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "layered" => Ok(DotMode::Layered),
            "condensed" => Ok(DotMode::Condensed),
            _ => Err(crate::error::Error::invalid(format!(
                "unknown dot mode `{s}`"
            ))),
        }
    }
}

fn style<S: Scalar>(brain: &Brain<S>, node: usize) -> &'static str {
    if brain.input_nodes().contains(&node) {
        "shape=circle, style=filled, fillcolor=lightblue"
    } else if brain.output_nodes().contains(&node) {
        "shape=doublecircle, style=filled, fillcolor=salmon"
    } else {
        "shape=circle"
    }
}

pub fn export_dot<S: Scalar>(brain: &Brain<S>, mode: DotMode) -> String {
    let mut s = String::from("digraph brain {\n");
    match mode {
        DotMode::Layered => {
            s.push_str("  rankdir=TB;\n");
            s.push_str("  { rank=same;\n");
            for n in 0..brain.n_nodes() {
                writeln!(s, "    t_{n} [label=\"{n}\", {}];", style(brain, n)).unwrap();
            }
            s.push_str("  }\n  { rank=same;\n");
            for (i, g) in brain.blueprints().enumerate() {
                writeln!(s, "    g_{i} [label=\"{i}: {}\", shape=box];", g.kind()).unwrap();
            }
            s.push_str("  }\n  { rank=same;\n");
            for n in 0..brain.n_nodes() {
                writeln!(s, "    n_{n} [label=\"{n}'\", {}];", style(brain, n)).unwrap();
            }
            s.push_str("  }\n");
            for (i, g) in brain.blueprints().enumerate() {
                for a in g.read_nodes() {
                    writeln!(s, "  t_{a} -> g_{i};").unwrap();
                }
                for b in &g.outputs {
                    writeln!(s, "  g_{i} -> n_{b};").unwrap();
                }
            }
        }
        DotMode::Condensed => {
            for n in active_nodes(brain) {
                writeln!(s, "  n_{n} [label=\"{n}\", {}];", style(brain, n)).unwrap();
            }
            for (a, b) in connections(brain) {
                writeln!(s, "  n_{a} -> n_{b};").unwrap();
            }
        }
    }
    s.push_str("}\n");
    s
}
