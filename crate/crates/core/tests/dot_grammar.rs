//! Exported graphs must parse under the DOT grammar. The parser below is a
//! small recursive-descent reading of that grammar, kept test-only.

use std::collections::{BTreeMap, BTreeSet};

use markov_brain::analysis::{active_nodes, connections, export_dot, DotMode};
use markov_brain::brain::Brain;
use markov_brain::gates::{GateBlueprint, LogicTable, Payload, ProbabilityTable};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Id(String),
    Punct(char),
    Arrow(&'static str),
}

fn lex(text: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && cs.get(i + 1) == Some(&'/') || c == '#' {
            while i < cs.len() && cs[i] != '\n' {
                i += 1;
            }
        } else if c == '-' && matches!(cs.get(i + 1), Some('>') | Some('-')) {
            out.push(Tok::Arrow(if cs[i + 1] == '>' { "->" } else { "--" }));
            i += 2;
        } else if "{}[];,=:".contains(c) {
            out.push(Tok::Punct(c));
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match cs.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') if cs.get(i + 1) == Some(&'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(Tok::Id(s));
        } else if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' {
            let start = i;
            let numeral = c.is_ascii_digit() || c == '.' || c == '-';
            while i < cs.len()
                && (cs[i].is_alphanumeric() || cs[i] == '_' || (numeral && cs[i] == '.'))
            {
                i += 1;
            }
            if i == start {
                return Err(format!("stray `{c}`"));
            }
            let id: String = cs[start..i].iter().collect();
            if numeral && id.chars().skip(1).any(|x| !x.is_ascii_digit() && x != '.') {
                return Err(format!("bad numeral `{id}`"));
            }
            out.push(Tok::Id(id));
        } else {
            return Err(format!("unexpected `{c}`"));
        }
    }
    Ok(out)
}

#[derive(Debug, Default)]
struct Graph {
    directed: bool,
    nodes: BTreeMap<String, BTreeMap<String, String>>,
    edges: Vec<(String, String)>,
    subgraphs: usize,
}

struct Parser {
    toks: Vec<Tok>,
    at: usize,
    g: Graph,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<(), String> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(format!(
                "expected {t:?} at token {}, found {:?}",
                self.at,
                self.peek()
            ))
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.peek().cloned() {
            Some(Tok::Id(s)) => {
                self.at += 1;
                Ok(s)
            }
            other => Err(format!("expected ID at token {}, found {other:?}", self.at)),
        }
    }

    fn is_keyword(&self, k: usize, word: &str) -> bool {
        matches!(self.peek_at(k), Some(Tok::Id(s)) if s.eq_ignore_ascii_case(word))
    }

    fn graph(mut self) -> Result<Graph, String> {
        if self.is_keyword(0, "strict") {
            self.at += 1;
        }
        self.g.directed = if self.is_keyword(0, "digraph") {
            true
        } else if self.is_keyword(0, "graph") {
            false
        } else {
            return Err("missing graph keyword".into());
        };
        self.at += 1;
        if matches!(self.peek(), Some(Tok::Id(_))) {
            self.at += 1;
        }
        self.expect(&Tok::Punct('{'))?;
        self.stmt_list()?;
        self.expect(&Tok::Punct('}'))?;
        if self.at != self.toks.len() {
            return Err("trailing tokens".into());
        }
        Ok(self.g)
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        while !matches!(self.peek(), Some(Tok::Punct('}')) | None) {
            self.stmt()?;
            self.eat(&Tok::Punct(';'));
        }
        Ok(())
    }

    fn attr_list(&mut self) -> Result<BTreeMap<String, String>, String> {
        let mut attrs = BTreeMap::new();
        while self.eat(&Tok::Punct('[')) {
            while !self.eat(&Tok::Punct(']')) {
                let k = self.id()?;
                self.expect(&Tok::Punct('='))?;
                let v = self.id()?;
                attrs.insert(k, v);
                if !self.eat(&Tok::Punct(',')) {
                    self.eat(&Tok::Punct(';'));
                }
            }
        }
        Ok(attrs)
    }

    /// Returns the node ids an edge endpoint stands for.
    fn endpoint(&mut self) -> Result<Vec<String>, String> {
        if self.is_keyword(0, "subgraph") || self.peek() == Some(&Tok::Punct('{')) {
            return self.subgraph();
        }
        let id = self.id()?;
        if self.eat(&Tok::Punct(':')) {
            self.id()?;
            if self.eat(&Tok::Punct(':')) {
                self.id()?;
            }
        }
        self.g.nodes.entry(id.clone()).or_default();
        Ok(vec![id])
    }

    fn subgraph(&mut self) -> Result<Vec<String>, String> {
        if self.is_keyword(0, "subgraph") {
            self.at += 1;
            if matches!(self.peek(), Some(Tok::Id(_))) {
                self.at += 1;
            }
        }
        let before: BTreeSet<String> = self.g.nodes.keys().cloned().collect();
        self.expect(&Tok::Punct('{'))?;
        self.stmt_list()?;
        self.expect(&Tok::Punct('}'))?;
        self.g.subgraphs += 1;
        Ok(self
            .g
            .nodes
            .keys()
            .filter(|k| !before.contains(*k))
            .cloned()
            .collect())
    }

    fn stmt(&mut self) -> Result<(), String> {
        for kw in ["graph", "node", "edge"] {
            if self.is_keyword(0, kw) && self.peek_at(1) == Some(&Tok::Punct('[')) {
                self.at += 1;
                self.attr_list()?;
                return Ok(());
            }
        }
        if matches!(self.peek(), Some(Tok::Id(_))) && self.peek_at(1) == Some(&Tok::Punct('=')) {
            self.id()?;
            self.at += 1;
            self.id()?;
            return Ok(());
        }
        let mut left = self.endpoint()?;
        let arrow = if self.g.directed { "->" } else { "--" };
        let mut edged = false;
        while let Some(Tok::Arrow(a)) = self.peek().cloned() {
            if a != arrow {
                return Err(format!("`{a}` in a graph using `{arrow}`"));
            }
            self.at += 1;
            let right = self.endpoint()?;
            for a in &left {
                for b in &right {
                    self.g.edges.push((a.clone(), b.clone()));
                }
            }
            left = right;
            edged = true;
        }
        let attrs = self.attr_list()?;
        if !edged && left.len() == 1 {
            self.g.nodes.get_mut(&left[0]).unwrap().extend(attrs);
        }
        Ok(())
    }
}

fn parse_dot(text: &str) -> Result<Graph, String> {
    Parser {
        toks: lex(text)?,
        at: 0,
        g: Graph::default(),
    }
    .graph()
}

/// Two gates sharing a node: a logic gate 0,1 -> 2,3 and a stochastic gate
/// 3,4 -> 4,5, with 0,1 as sensors and 5 as the actuator.
fn two_gate_brain() -> Brain<f64> {
    let logic = LogicTable::binary(2, 2, vec![0, 1, 2, 3]).unwrap();
    let prob = ProbabilityTable::indicator(&LogicTable::binary(2, 2, vec![3, 2, 1, 0]).unwrap());
    let gates = vec![
        GateBlueprint::new(vec![0, 1], vec![2, 3], Payload::Deterministic(logic), 8).unwrap(),
        GateBlueprint::new(vec![3, 4], vec![4, 5], Payload::Probabilistic(prob), 8).unwrap(),
    ];
    Brain::new(gates, 8, vec![0, 1], vec![5], false).unwrap()
}

fn node_index(name: &str) -> usize {
    name[2..].parse().unwrap()
}

#[test]
fn parser_rejects_malformed_text() {
    assert!(parse_dot("digraph { a -> b ").is_err());
    assert!(parse_dot("digraph { a -- b }").is_err());
    assert!(parse_dot("digraph { a [label=] }").is_err());
    assert!(parse_dot("digraph { \"open }").is_err());
    let g =
        parse_dot("strict graph x { a -- b -- c; node [shape=box]; k=v; { d e } -- f }").unwrap();
    assert_eq!(g.edges.len(), 4);
    assert_eq!(g.subgraphs, 1);
}

#[test]
fn layered_export_parses() {
    let brain = two_gate_brain();
    let g = parse_dot(&export_dot(&brain, DotMode::Layered)).unwrap();
    assert!(g.directed);
    assert_eq!(g.subgraphs, 3);
    assert_eq!(g.nodes.len(), 2 * 8 + 2);
    let edges: BTreeSet<(String, String)> = g.edges.iter().cloned().collect();
    let want: BTreeSet<(String, String)> = [
        ("t_0", "g_0"),
        ("t_1", "g_0"),
        ("g_0", "n_2"),
        ("g_0", "n_3"),
        ("t_3", "g_1"),
        ("t_4", "g_1"),
        ("g_1", "n_4"),
        ("g_1", "n_5"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(edges, want);
    assert_eq!(g.nodes["g_0"]["shape"], "box");
    assert_eq!(g.nodes["g_1"]["shape"], "box");
    let style = |n: &str| {
        (
            g.nodes[n].get("shape").cloned(),
            g.nodes[n].get("fillcolor").cloned(),
        )
    };
    assert_ne!(style("t_0"), style("t_5"));
    assert_ne!(style("t_0"), style("t_2"));
    assert_ne!(style("t_5"), style("t_2"));
    assert_eq!(style("t_5"), style("n_5"));
}

#[test]
fn condensed_export_parses_and_matches_connections() {
    let brain = two_gate_brain();
    let g = parse_dot(&export_dot(&brain, DotMode::Condensed)).unwrap();
    let nodes: BTreeSet<usize> = g.nodes.keys().map(|n| node_index(n)).collect();
    assert_eq!(nodes, active_nodes(&brain));
    assert_eq!(nodes, (0..6).collect());
    let edges: BTreeSet<(usize, usize)> = g
        .edges
        .iter()
        .map(|(a, b)| (node_index(a), node_index(b)))
        .collect();
    assert_eq!(g.edges.len(), edges.len(), "duplicate edges");
    assert_eq!(edges, connections(&brain));
    assert_eq!(edges.len(), 8);
    assert!(edges.contains(&(4, 4)));
}
