//! Report model and its JSON and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dirac_core::expr::print_rational;
use dirac_core::{
    print_expression, AlgebraReport, BracketMode, Classification, ConstraintKind, Partner,
    PhaseSpace, Rational, TraceIdentity, Verdict, VerdictKind, Witness,
};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Top-level report. Sections a command does not compute are left out of
/// the JSON document; `timings_ms` is always present and is `null` unless
/// timings were requested.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub input_digest: String,
    pub system: SystemSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_identity: Option<TraceOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure: Option<ClosureOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictOut>,
    pub timings_ms: Option<BTreeMap<&'static str, f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemSummary {
    pub n: usize,
    /// Number of constraint pairs.
    pub m: usize,
    pub parameters: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationOut {
    pub verdict: ConstraintKind,
    pub symbolic_det_nonzero: bool,
    pub on_shell_rank: usize,
    pub dof_pairs: usize,
}

impl From<&Classification> for ClassificationOut {
    fn from(c: &Classification) -> Self {
        ClassificationOut {
            verdict: c.verdict,
            symbolic_det_nonzero: c.symbolic_det_nonzero,
            on_shell_rank: c.on_shell_rank,
            dof_pairs: c.dof_pairs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceOut {
    pub value: String,
    pub expected: i64,
    pub holds: bool,
}

impl TraceOut {
    pub fn new(t: &TraceIdentity, ps: &PhaseSpace) -> Self {
        TraceOut {
            value: print_expression(&t.value.exact_quotient(), ps),
            expected: t.expected,
            holds: t.holds,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualOut {
    pub left: String,
    pub right: String,
    pub residual: String,
}

/// Rationals are written as strings such as `"-3/2"`.
#[derive(Debug, Clone, Serialize)]
pub struct ClosureOut {
    pub mode: BracketMode,
    pub names: Vec<String>,
    pub closed: bool,
    pub c: Vec<Vec<Vec<String>>>,
    pub z: Vec<Vec<String>>,
    pub h: Option<Vec<Vec<String>>>,
    pub residuals: Vec<ResidualOut>,
    pub obstruction: Option<VerdictOut>,
}

impl ClosureOut {
    pub fn new(report: &AlgebraReport, obstruction: Option<&Verdict>, ps: &PhaseSpace) -> Self {
        let row = |r: &Vec<Rational>| r.iter().map(print_rational).collect::<Vec<_>>();
        ClosureOut {
            mode: report.mode,
            names: report.names.clone(),
            closed: report.closed,
            c: report
                .c
                .iter()
                .map(|plane| plane.iter().map(row).collect())
                .collect(),
            z: report.z.iter().map(row).collect(),
            h: report.h.as_ref().map(|h| h.iter().map(row).collect()),
            residuals: report
                .residuals
                .iter()
                .map(|(&(a, partner), r)| ResidualOut {
                    left: report.names[a].clone(),
                    right: match partner {
                        Partner::Primary(b) => report.names[b].clone(),
                        Partner::Hamiltonian => "H".to_string(),
                    },
                    residual: print_expression(&r.exact_quotient(), ps),
                })
                .collect(),
            obstruction: obstruction.map(|v| VerdictOut::new(v, ps)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WitnessOut {
    CentralCharge {
        left: String,
        right: String,
        value: String,
    },
    Trace {
        value: String,
        expected: i64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictOut {
    pub kind: VerdictKind,
    pub witness: Option<WitnessOut>,
    pub explanation: String,
}

impl VerdictOut {
    pub fn new(v: &Verdict, ps: &PhaseSpace) -> Self {
        VerdictOut {
            kind: v.kind,
            witness: v.witness.as_ref().map(|w| match w {
                Witness::CentralCharge {
                    left, right, value, ..
                } => WitnessOut::CentralCharge {
                    left: left.clone(),
                    right: right.clone(),
                    value: print_rational(value),
                },
                Witness::Trace { value, expected } => WitnessOut::Trace {
                    value: print_expression(&value.exact_quotient(), ps),
                    expected: *expected,
                },
            }),
            explanation: v.explanation.clone(),
        }
    }
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.to_text(),
        }
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "version: {}", self.version);
        let _ = writeln!(w, "input_digest: {}", self.input_digest);
        let params = if self.system.parameters.is_empty() {
            "none".to_string()
        } else {
            self.system.parameters.join(", ")
        };
        let _ = writeln!(
            w,
            "system: n = {}, m = {}, parameters: {params}",
            self.system.n, self.system.m
        );
        if let Some(c) = &self.classification {
            let _ = writeln!(w, "classification: {}", c.verdict);
            let _ = writeln!(w, "  symbolic_det_nonzero: {}", c.symbolic_det_nonzero);
            let _ = writeln!(w, "  on_shell_rank: {}", c.on_shell_rank);
            let _ = writeln!(w, "  dof_pairs: {}", c.dof_pairs);
        }
        if let Some(t) = &self.trace_identity {
            let _ = writeln!(w, "trace_identity: sum_i {{x_i, p_i}}_D = {}", t.value);
            let _ = writeln!(w, "  expected: {}", t.expected);
            let _ = writeln!(w, "  holds: {}", t.holds);
        }
        if let Some(c) = &self.closure {
            c.write_text(w);
        }
        if let Some(v) = &self.verdict {
            v.write_text(w, "");
        }
        if let Some(t) = &self.timings_ms {
            let _ = writeln!(w, "timings_ms:");
            for (stage, ms) in t {
                let _ = writeln!(w, "  {stage}: {ms:.3}");
            }
        }
        out
    }
}

impl ClosureOut {
    fn write_text(&self, w: &mut String) {
        let _ = writeln!(
            w,
            "closure ({} mode): {}",
            self.mode,
            if self.closed { "closed" } else { "not closed" }
        );
        let k = self.names.len();
        for a in 0..k {
            for b in a + 1..k {
                if let Some(r) = self
                    .residuals
                    .iter()
                    .find(|r| r.left == self.names[a] && r.right == self.names[b])
                {
                    let _ = writeln!(
                        w,
                        "  {{{}, {}}} = {}  (outside the span)",
                        self.names[a], self.names[b], r.residual
                    );
                } else {
                    let combo = combination(&self.c[a][b], &self.names, &self.z[a][b]);
                    let _ = writeln!(w, "  {{{}, {}}} = {combo}", self.names[a], self.names[b]);
                }
            }
        }
        if let Some(h) = &self.h {
            for (a, row) in h.iter().enumerate() {
                if let Some(r) = self
                    .residuals
                    .iter()
                    .find(|r| r.left == self.names[a] && r.right == "H")
                {
                    let _ = writeln!(
                        w,
                        "  {{{}, H}} = {}  (outside the span)",
                        self.names[a], r.residual
                    );
                } else {
                    let combo = combination(&row[..k], &self.names, &row[k]);
                    let _ = writeln!(w, "  {{{}, H}} = {combo}", self.names[a]);
                }
            }
        }
        let central: Vec<String> = (0..k)
            .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
            .filter(|&(a, b)| self.z[a][b] != "0")
            .map(|(a, b)| format!("z({}, {}) = {}", self.names[a], self.names[b], self.z[a][b]))
            .collect();
        if central.is_empty() {
            let _ = writeln!(w, "  central charges: none");
        } else {
            let _ = writeln!(w, "  central charges: {}", central.join(", "));
        }
        if let Some(v) = &self.obstruction {
            v.write_text(w, "  obstruction ");
        }
    }
}

impl VerdictOut {
    fn write_text(&self, w: &mut String, prefix: &str) {
        let _ = writeln!(w, "{prefix}verdict: {}", self.kind);
        match &self.witness {
            Some(WitnessOut::CentralCharge { left, right, value }) => {
                let _ = writeln!(w, "{prefix}witness: z({left}, {right}) = {value}");
            }
            Some(WitnessOut::Trace { value, expected }) => {
                let _ = writeln!(
                    w,
                    "{prefix}witness: sum_i {{x_i, p_i}}_D = {value} (n - m = {expected})"
                );
            }
            None => {}
        }
        let _ = writeln!(w, "{prefix}explanation: {}", self.explanation);
    }
}

/// `coeffs . names + constant` with exact coefficients, e.g. `L3 - 1/2*L1 + 1`.
fn combination(coeffs: &[String], names: &[String], constant: &str) -> String {
    let mut terms: Vec<(bool, String)> = Vec::new();
    for (c, name) in coeffs.iter().zip(names) {
        let Ok(q) = c.parse::<Rational>() else {
            continue;
        };
        if q.is_zero() {
            continue;
        }
        let mag = q.abs();
        let body = if mag.is_one() {
            name.clone()
        } else {
            format!("{}*{name}", print_rational(&mag))
        };
        terms.push((q.is_negative(), body));
    }
    if let Ok(q) = constant.parse::<Rational>() {
        if !q.is_zero() {
            terms.push((q.is_negative(), print_rational(&q.abs())));
        }
    }
    let mut out = String::new();
    for (i, (neg, body)) in terms.iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
