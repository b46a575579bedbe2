//! Text form of a decoded brain: one `GATE` line per gate.
//!
//! ```text
//! GATE deterministic in=0,3 out=5 payload=0,0,0,1
//! ```
//!
//! Payload fields by kind: logic rows (deterministic, ternary_det); table
//! entries row-major (probabilistic, ternary_prob); weights output-major
//! (ann); the threshold or period (threshold, timer); and for feedback
//! `capacity,delta_max,floor,pos_node,neg_node` followed by the table.

use std::fmt::{Display, Write as _};

use crate::error::{Error, Result};
use crate::gates::{
    FeedbackParams, GateBlueprint, GateKind, LogicTable, Payload, ProbabilityTable, WeightMatrix,
};
use crate::scalar::Scalar;

fn csv<T: Display>(items: impl IntoIterator<Item = T>) -> String {
    let mut s = String::new();
    for (i, x) in items.into_iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{x}").unwrap();
    }
    s
}

pub fn dump_gate<S: Scalar>(gate: &GateBlueprint<S>) -> String {
    let payload = match &gate.payload {
        Payload::Deterministic(t) | Payload::TernaryDeterministic(t) => csv(t.rows()),
        Payload::Probabilistic(t) | Payload::TernaryProbabilistic(t) => csv(t.entries()),
        Payload::Ann(w) => csv(w.weights()),
        Payload::Threshold { threshold } => threshold.to_string(),
        Payload::Timer { period } => period.to_string(),
        Payload::Feedback(f) => format!(
            "{},{},{},{},{},{}",
            f.capacity,
            f.delta_max,
            f.floor,
            f.pos_node,
            f.neg_node,
            csv(f.table.entries())
        ),
    };
    format!(
        "GATE {} in={} out={} payload={}",
        gate.kind(),
        csv(&gate.inputs),
        csv(&gate.outputs),
        payload
    )
}

pub fn dump_brain<'a, S: Scalar>(gates: impl IntoIterator<Item = &'a GateBlueprint<S>>) -> String {
    gates.into_iter().fold(String::new(), |mut s, g| {
        s.push_str(&dump_gate(g));
        s.push('\n');
        s
    })
}

/// Parses a dump back into blueprints, validating them against `n_nodes`.
pub fn parse_dump<S: Scalar>(text: &str, n_nodes: usize) -> Result<Vec<GateBlueprint<S>>> {
    let mut gates = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let body = line.trim();
        if !body.is_empty() && !body.starts_with('#') {
            gates.push(parse_line(body, n_nodes).map_err(|e| match e {
                Error::InvalidArgument(m) => Error::parse(offset, m),
                other => other,
            })?);
        }
        offset += line.len();
    }
    Ok(gates)
}

fn field<'a>(token: Option<&'a str>, key: &str) -> Result<&'a str> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::invalid(format!("expected `{key}=`")))
}

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.parse()
                .map_err(|_| Error::invalid(format!("bad value `{x}`")))
        })
        .collect()
}

fn parse_line<S: Scalar>(line: &str, n_nodes: usize) -> Result<GateBlueprint<S>> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("GATE") {
        return Err(Error::invalid("line does not start with GATE"));
    }
    let kind: GateKind = tokens
        .next()
        .ok_or_else(|| Error::invalid("missing gate kind"))?
        .parse()?;
    let inputs: Vec<usize> = list(field(tokens.next(), "in")?)?;
    let outputs: Vec<usize> = list(field(tokens.next(), "out")?)?;
    let raw = field(tokens.next(), "payload")?;
    if tokens.next().is_some() {
        return Err(Error::invalid("trailing fields after payload"));
    }
    let (n_in, n_out) = (inputs.len(), outputs.len());
    let table = |radix: usize, values: &[S]| -> Result<ProbabilityTable<S>> {
        let width = radix.pow(n_out as u32);
        let rows: Vec<Vec<S>> = values.chunks(width).map(<[S]>::to_vec).collect();
        ProbabilityTable::from_rows(n_in, n_out, radix, &rows)
    };
    let payload = match kind {
        GateKind::Deterministic => {
            Payload::Deterministic(LogicTable::binary(n_in, n_out, list(raw)?)?)
        }
        GateKind::TernaryDeterministic => {
            Payload::TernaryDeterministic(LogicTable::ternary(n_in, n_out, list(raw)?)?)
        }
        GateKind::Probabilistic => Payload::Probabilistic(table(2, &list(raw)?)?),
        GateKind::TernaryProbabilistic => Payload::TernaryProbabilistic(table(3, &list(raw)?)?),
        GateKind::Ann => Payload::Ann(WeightMatrix::new(n_in, n_out, list(raw)?)?),
        GateKind::Threshold => Payload::Threshold {
            threshold: raw.parse().map_err(|_| Error::invalid("bad threshold"))?,
        },
        GateKind::Timer => Payload::Timer {
            period: raw.parse().map_err(|_| Error::invalid("bad period"))?,
        },
        GateKind::Feedback => {
            let parts: Vec<&str> = raw.splitn(6, ',').collect();
            if parts.len() != 6 {
                return Err(Error::invalid("feedback payload is too short"));
            }
            let num = |s: &str| -> Result<usize> {
                s.parse()
                    .map_err(|_| Error::invalid(format!("bad value `{s}`")))
            };
            let real = |s: &str| -> Result<S> {
                s.parse()
                    .map_err(|_| Error::invalid(format!("bad value `{s}`")))
            };
            Payload::Feedback(FeedbackParams {
                capacity: num(parts[0])?,
                delta_max: real(parts[1])?,
                floor: real(parts[2])?,
                pos_node: num(parts[3])?,
                neg_node: num(parts[4])?,
                table: table(2, &list(parts[5])?)?,
            })
        }
    };
    GateBlueprint::new(inputs, outputs, payload, n_nodes)
}
