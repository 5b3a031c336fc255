//! Replayable record of one circuit realization and its outcomes.
//!
//! Text format, one item per line:
//!
//! ```text
//! # iclab event record v1
//! seed 42
//! realization 7
//! config 3f2a9c0d11e4b865
//! qubits 4
//! E 0 g 1234@0:1 88@2:3
//! S 0 g 511@0:1 17@2:3 ; m 1=0 ; n 0=reset ; a 3=0
//! ```
//!
//! `E` lines are unitary encoding layers (empty unless the record belongs to a
//! χ run). `S` lines hold one circuit step: gates as `id@a:b`, measurements
//! as `qubit=bit`, noise events as `qubit=kind` and QE events as
//! `qubit=ancilla_index`. Sections that are empty may be omitted.

use std::fmt::Write as _;

use super::config::NoiseKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateEvent {
    pub gate: u16,
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepRecord {
    pub gates: Vec<GateEvent>,
    pub measurements: Vec<(usize, u8)>,
    pub noise: Vec<(usize, NoiseKind)>,
    pub qe: Vec<(usize, usize)>,
}

/// A channel event in processing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelEvent {
    Noise { qubit: usize, kind: NoiseKind },
    Qe { qubit: usize, ancilla: usize },
}

impl StepRecord {
    /// Noise and QE events merged in ascending qubit order.
    pub fn channel_events(&self) -> Vec<ChannelEvent> {
        let mut out: Vec<ChannelEvent> = self
            .noise
            .iter()
            .map(|&(qubit, kind)| ChannelEvent::Noise { qubit, kind })
            .chain(self.qe.iter().map(|&(qubit, ancilla)| ChannelEvent::Qe { qubit, ancilla }))
            .collect();
        out.sort_by_key(|e| match *e {
            ChannelEvent::Noise { qubit, .. } | ChannelEvent::Qe { qubit, .. } => qubit,
        });
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventRecord {
    pub seed: u64,
    pub realization: u64,
    pub config_hash: String,
    pub num_system: usize,
    pub encode: Vec<Vec<GateEvent>>,
    pub steps: Vec<StepRecord>,
}

const HEADER: &str = "# iclab event record v1";

fn write_gates(out: &mut String, gates: &[GateEvent]) {
    out.push_str(" g");
    for g in gates {
        let _ = write!(out, " {}@{}:{}", g.gate, g.a, g.b);
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse(format!("expected integer, got {s:?}")))
}

fn parse_pair(tok: &str) -> Result<(&str, &str)> {
    tok.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {tok:?}")))
}

fn parse_gate(tok: &str) -> Result<GateEvent> {
    let bad = || Error::Parse(format!("bad gate token {tok:?}"));
    let (id, pair) = tok.split_once('@').ok_or_else(bad)?;
    let (a, b) = pair.split_once(':').ok_or_else(bad)?;
    let gate: u16 = id.parse().map_err(|_| bad())?;
    if gate as usize >= crate::clifford::TWO_QUBIT_CLIFFORD_COUNT {
        return Err(bad());
    }
    Ok(GateEvent { gate, a: parse_usize(a)?, b: parse_usize(b)? })
}

impl EventRecord {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "realization {}", self.realization);
        let _ = writeln!(out, "config {}", self.config_hash);
        let _ = writeln!(out, "qubits {}", self.num_system);
        for (i, layer) in self.encode.iter().enumerate() {
            let _ = write!(out, "E {i}");
            write_gates(&mut out, layer);
            out.push('\n');
        }
        for (t, step) in self.steps.iter().enumerate() {
            let _ = write!(out, "S {t}");
            write_gates(&mut out, &step.gates);
            out.push_str(" ; m");
            for (q, b) in &step.measurements {
                let _ = write!(out, " {q}={b}");
            }
            out.push_str(" ; n");
            for (q, k) in &step.noise {
                let _ = write!(out, " {q}={}", k.as_str());
            }
            out.push_str(" ; a");
            for (q, a) in &step.qe {
                let _ = write!(out, " {q}={a}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rec = EventRecord::default();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(HEADER) {
            return Err(Error::Parse("missing event record header".into()));
        }
        for line in lines {
            let (tag, rest) = line.trim().split_once(' ').unwrap_or((line.trim(), ""));
            match tag {
                "seed" => rec.seed = rest.trim().parse().map_err(|_| Error::Parse(format!("bad seed {rest:?}")))?,
                "realization" => {
                    rec.realization = rest.trim().parse().map_err(|_| Error::Parse(format!("bad realization {rest:?}")))?
                }
                "config" => rec.config_hash = rest.trim().to_string(),
                "qubits" => rec.num_system = parse_usize(rest.trim())?,
                "E" => {
                    let mut toks = rest.split_whitespace();
                    let idx = parse_usize(toks.next().unwrap_or(""))?;
                    if idx != rec.encode.len() {
                        return Err(Error::Parse(format!("encode layer {idx} out of order")));
                    }
                    let mut layer = Vec::new();
                    for tok in toks {
                        if tok != "g" {
                            layer.push(parse_gate(tok)?);
                        }
                    }
                    rec.encode.push(layer);
                }
                "S" => {
                    let (head, body) = rest.split_once(' ').unwrap_or((rest, ""));
                    let idx = parse_usize(head)?;
                    if idx != rec.steps.len() {
                        return Err(Error::Parse(format!("step {idx} out of order")));
                    }
                    let mut step = StepRecord::default();
                    for section in body.split(';') {
                        let mut toks = section.split_whitespace();
                        let Some(kind) = toks.next() else { continue };
                        for tok in toks {
                            match kind {
                                "g" => step.gates.push(parse_gate(tok)?),
                                "m" => {
                                    let (q, b) = parse_pair(tok)?;
                                    let b = match b {
                                        "0" => 0,
                                        "1" => 1,
                                        _ => return Err(Error::Parse(format!("bad outcome {tok:?}"))),
                                    };
                                    step.measurements.push((parse_usize(q)?, b));
                                }
                                "n" => {
                                    let (q, k) = parse_pair(tok)?;
                                    step.noise.push((parse_usize(q)?, k.parse()?));
                                }
                                "a" => {
                                    let (q, a) = parse_pair(tok)?;
                                    step.qe.push((parse_usize(q)?, parse_usize(a)?));
                                }
                                _ => return Err(Error::Parse(format!("unknown section {kind:?}"))),
                            }
                        }
                    }
                    rec.steps.push(step);
                }
                _ => return Err(Error::Parse(format!("unknown line tag {tag:?}"))),
            }
        }
        Ok(rec)
    }

    pub fn num_measurements(&self) -> usize {
        self.steps.iter().map(|s| s.measurements.len()).sum()
    }

    pub fn num_qe(&self) -> usize {
        self.steps.iter().map(|s| s.qe.len()).sum()
    }

    /// Environment qubits an explicit (never traced) simulation would need.
    pub fn num_environment_qubits(&self) -> usize {
        self.steps
            .iter()
            .flat_map(|s| &s.noise)
            .map(|(_, k)| if *k == NoiseKind::Depolarize { 2 } else { 1 })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EventRecord {
        EventRecord {
            seed: 42,
            realization: 7,
            config_hash: "abc123".into(),
            num_system: 4,
            encode: vec![vec![GateEvent { gate: 5, a: 0, b: 1 }], vec![]],
            steps: vec![
                StepRecord {
                    gates: vec![GateEvent { gate: 11519, a: 0, b: 1 }, GateEvent { gate: 3, a: 2, b: 3 }],
                    measurements: vec![(1, 0), (3, 1)],
                    noise: vec![(0, NoiseKind::Reset), (2, NoiseKind::Dephase)],
                    qe: vec![(1, 0)],
                },
                StepRecord::default(),
            ],
        }
    }

    #[test]
    fn text_round_trip() {
        let r = sample();
        let text = r.to_text();
        assert_eq!(EventRecord::from_text(&text).unwrap(), r);
        assert!(text.contains("S 0 g 11519@0:1 3@2:3 ; m 1=0 3=1 ; n 0=reset 2=dephase ; a 1=0"));
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(EventRecord::from_text("seed 1").is_err());
        let bad = sample().to_text().replace("11519@0:1", "11520@0:1");
        assert!(EventRecord::from_text(&bad).is_err());
        let bad = sample().to_text().replace("3=1", "3=2");
        assert!(EventRecord::from_text(&bad).is_err());
    }

    #[test]
    fn channel_events_are_sorted_by_qubit() {
        let ev = sample().steps[0].channel_events();
        let qs: Vec<usize> = ev
            .iter()
            .map(|e| match *e {
                ChannelEvent::Noise { qubit, .. } | ChannelEvent::Qe { qubit, .. } => qubit,
            })
            .collect();
        assert_eq!(qs, vec![0, 1, 2]);
        assert_eq!(sample().num_environment_qubits(), 2);
    }
}
