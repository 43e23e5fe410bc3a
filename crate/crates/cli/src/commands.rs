//! Command implementations. Each returns a value for `main` to print, or a
//! [`CliError`] carrying the exit code.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use dirac_core::closure::verdict_from_trace;
use dirac_core::{
    classify_constraints, closure_analysis, finite_dim_obstruction, make_context, parse_expression,
    poisson_bracket, print_expression, Bracket, BracketMode, Classification, ConstraintKind,
    DiracContext, Error as CoreError, PrimarySet, RationalExpr,
};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::report::{ClassificationOut, ClosureOut, Report, SystemSummary, TraceOut, VerdictOut};
use crate::system::{parse_system, SystemError, SystemSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    /// 0 success, 2 input error, 3 not second class, 4 sampling failure,
    /// 5 non-polynomial closure input, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::System(_) | CliError::Input(_) => 2,
            CliError::Core(e) => match e {
                CoreError::Syntax { .. }
                | CoreError::UnknownSymbol { .. }
                | CoreError::TooLarge { .. }
                | CoreError::InvalidPhaseSpace(_)
                | CoreError::UnboundSymbol(_)
                | CoreError::InvalidConfig(_)
                | CoreError::InvalidCounts { .. } => 2,
                CoreError::NotSecondClass(_)
                | CoreError::OddConstraintCount(_)
                | CoreError::TooManyConstraints { .. } => 3,
                CoreError::NoOnShellPoint { .. } => 4,
                CoreError::NonPolynomialInput(_) | CoreError::ZeroDenominatorOnShell => 5,
                _ => 1,
            },
        }
    }

    /// Extra advice printed after the message, if any.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Core(CoreError::NonPolynomialInput(_)) => Some(
                "brackets with non-constant denominators cannot be decomposed; list constraints under \
                 [onshell] so they are reduced on the constraint surface, or use --mode poisson",
            ),
            CliError::Core(CoreError::UnboundSymbol(_)) => {
                Some("add `bind <name> = <value>` to [system] so on-shell points can be sampled")
            }
            CliError::Core(CoreError::NoOnShellPoint { .. }) => {
                Some("the constraint surface may be empty; try another seed or a larger [sampler] max_retries")
            }
            _ => None,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    /// Include wall-clock stage timings (makes output non-reproducible).
    pub timings: bool,
}

/// A loaded system together with the digest of the bytes it came from.
pub struct Input {
    pub sys: SystemSpec,
    pub digest: String,
}

pub fn load_input(path: &Path) -> CliResult<Input> {
    let file = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| SystemError::Io {
        file: file.clone(),
        source,
    })?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| SystemError::Validation {
        file: file.clone(),
        line: None,
        message: format!(
            "file is not valid UTF-8 (byte {})",
            e.utf8_error().valid_up_to()
        ),
    })?;
    Ok(Input {
        sys: parse_system(&text, &file)?,
        digest,
    })
}

struct Timer {
    enabled: bool,
    stages: BTreeMap<&'static str, f64>,
}

impl Timer {
    fn new(opts: &Options) -> Self {
        Timer {
            enabled: opts.timings,
            stages: BTreeMap::new(),
        }
    }

    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.enabled {
            let ms = start.elapsed().as_secs_f64() * 1e3;
            self.stages.insert(stage, (ms * 1e3).round() / 1e3);
        }
        out
    }

    fn finish(self) -> Option<BTreeMap<&'static str, f64>> {
        self.enabled.then_some(self.stages)
    }
}

fn skeleton(input: &Input) -> Report {
    let sys = &input.sys;
    Report {
        version: crate::report::VERSION,
        input_digest: input.digest.clone(),
        system: SystemSummary {
            n: sys.phase_space.n(),
            m: sys.constraints.len() / 2,
            parameters: sys.phase_space.parameters().to_vec(),
        },
        classification: None,
        trace_identity: None,
        closure: None,
        verdict: None,
        timings_ms: None,
    }
}

fn classify_spec(sys: &SystemSpec) -> CliResult<Classification> {
    Ok(classify_constraints(
        &sys.phase_space,
        &sys.constraint_exprs(),
        &sys.sampler,
    )?)
}

fn require_second_class(c: &Classification, sys: &SystemSpec) -> CliResult<()> {
    if c.verdict == ConstraintKind::Degenerate {
        return Err(CoreError::NotSecondClass(format!(
            "Delta is {} and has on-shell rank {} of {}",
            if c.symbolic_det_nonzero {
                "invertible off shell"
            } else {
                "singular"
            },
            c.on_shell_rank,
            sys.constraints.len()
        ))
        .into());
    }
    Ok(())
}

fn context(sys: &SystemSpec) -> CliResult<DiracContext> {
    Ok(make_context(
        sys.phase_space.clone(),
        sys.constraint_exprs(),
    )?)
}

fn closure_fragment(sys: &SystemSpec, bracket: Bracket<'_>) -> CliResult<ClosureOut> {
    if sys.primaries.is_empty() {
        return Err(CliError::Input("the system declares no [primaries]".into()));
    }
    let set = PrimarySet::new(
        sys.primaries.iter().map(|p| p.name.clone()).collect(),
        sys.primaries.iter().map(|p| p.expr.clone()).collect(),
        sys.hamiltonian.as_ref().map(|h| h.expr.clone()),
    )?;
    let rules = sys.on_shell_rules();
    let report = closure_analysis(&set, bracket, Some(&rules))?;
    let obstruction = if report.closed {
        Some(finite_dim_obstruction(&report)?)
    } else {
        None
    };
    Ok(ClosureOut::new(
        &report,
        obstruction.as_ref(),
        &sys.phase_space,
    ))
}

/// Classification, trace identity, closure (when primaries are declared) and
/// the lemma verdict.
pub fn analyze(path: &Path, opts: &Options) -> CliResult<Report> {
    let input = load_input(path)?;
    let sys = &input.sys;
    let ps = &sys.phase_space;
    let mut report = skeleton(&input);
    let mut timer = Timer::new(opts);

    let classification = timer.time("classification", || classify_spec(sys))?;
    require_second_class(&classification, sys)?;
    report.classification = Some(ClassificationOut::from(&classification));

    let ctx = timer.time("context", || context(sys))?;
    let trace = timer.time("trace_identity", || dirac_core::trace_identity(&ctx));
    report.trace_identity = Some(TraceOut::new(&trace, ps));

    if !sys.primaries.is_empty() {
        let closure = timer.time("closure", || closure_fragment(sys, Bracket::Dirac(&ctx)))?;
        report.closure = Some(closure);
    }

    let verdict = timer.time("verdict", || verdict_from_trace(&ctx))?;
    report.verdict = Some(VerdictOut::new(&verdict, ps));
    report.timings_ms = timer.finish();
    Ok(report)
}

pub fn classify(path: &Path, opts: &Options) -> CliResult<Report> {
    let input = load_input(path)?;
    let mut report = skeleton(&input);
    let mut timer = Timer::new(opts);
    let classification = timer.time("classification", || classify_spec(&input.sys))?;
    report.classification = Some(ClassificationOut::from(&classification));
    report.timings_ms = timer.finish();
    Ok(report)
}

pub fn trace(path: &Path, opts: &Options) -> CliResult<Report> {
    let input = load_input(path)?;
    let mut report = skeleton(&input);
    let mut timer = Timer::new(opts);
    let ctx = timer.time("context", || context(&input.sys))?;
    let trace = timer.time("trace_identity", || dirac_core::trace_identity(&ctx));
    report.trace_identity = Some(TraceOut::new(&trace, &input.sys.phase_space));
    report.timings_ms = timer.finish();
    Ok(report)
}

pub fn closure(path: &Path, mode: BracketMode, opts: &Options) -> CliResult<Report> {
    let input = load_input(path)?;
    let sys = &input.sys;
    let mut report = skeleton(&input);
    let mut timer = Timer::new(opts);
    if sys.primaries.is_empty() {
        return Err(CliError::Input("the system declares no [primaries]".into()));
    }
    let closure = match mode {
        BracketMode::Poisson => timer.time("closure", || {
            closure_fragment(sys, Bracket::Poisson(&sys.phase_space))
        })?,
        BracketMode::Dirac => {
            let ctx = timer.time("context", || context(sys))?;
            timer.time("closure", || closure_fragment(sys, Bracket::Dirac(&ctx)))?
        }
    };
    report.closure = Some(closure);
    report.timings_ms = timer.finish();
    Ok(report)
}

/// Classification, trace identity and lemma verdict without the closure.
pub fn verdict(path: &Path, opts: &Options) -> CliResult<Report> {
    let input = load_input(path)?;
    let sys = &input.sys;
    let ps = &sys.phase_space;
    let mut report = skeleton(&input);
    let mut timer = Timer::new(opts);
    let classification = timer.time("classification", || classify_spec(sys))?;
    require_second_class(&classification, sys)?;
    report.classification = Some(ClassificationOut::from(&classification));
    let ctx = timer.time("context", || context(sys))?;
    let trace = timer.time("trace_identity", || dirac_core::trace_identity(&ctx));
    report.trace_identity = Some(TraceOut::new(&trace, ps));
    let verdict = timer.time("verdict", || verdict_from_trace(&ctx))?;
    report.verdict = Some(VerdictOut::new(&verdict, ps));
    report.timings_ms = timer.finish();
    Ok(report)
}

/// `{f, g}` in the requested mode, printed canonically.
pub fn bracket(path: &Path, f: &str, g: &str, mode: BracketMode) -> CliResult<String> {
    let input = load_input(path)?;
    let sys = &input.sys;
    let ps = &sys.phase_space;
    let parse = |flag: &str, text: &str| -> CliResult<RationalExpr> {
        parse_expression(text, ps).map_err(|e| CliError::Input(format!("--{flag} `{text}`: {e}")))
    };
    let (f, g) = (parse("f", f)?, parse("g", g)?);
    let value = match mode {
        BracketMode::Poisson => poisson_bracket(&f, &g, ps),
        BracketMode::Dirac => context(sys)?.dirac_bracket(&f, &g),
    };
    Ok(print_expression(&value.exact_quotient(), ps))
}
