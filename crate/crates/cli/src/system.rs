//! Line-oriented system files.
//!
//! ```text
//! [system]
//! n = 3
//! parameters = r
//! bind r = 1.0
//! [constraints]
//! chi1 = x1^2 + x2^2 + x3^2 - r^2
//! chi2 = p1*x1 + p2*x2 + p3*x3
//! [onshell]
//! use chi1
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use dirac_core::{
    parse_expression, Error as CoreError, PhaseSpace, Polynomial, RationalExpr, SamplerConfig,
};
use thiserror::Error;

/// Largest accepted number of canonical pairs.
pub const MAX_PAIRS: usize = 256;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}:{column}: {message}")]
    Syntax {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{file}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Validation {
        file: String,
        line: Option<usize>,
        message: String,
    },
}

/// A named expression together with where it came from.
#[derive(Debug, Clone)]
pub struct Named {
    pub name: String,
    pub expr: RationalExpr,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub phase_space: PhaseSpace,
    pub constraints: Vec<Named>,
    pub hamiltonian: Option<Named>,
    pub primaries: Vec<Named>,
    /// Indices into `constraints`.
    pub on_shell: Vec<usize>,
    pub sampler: SamplerConfig,
}

impl SystemSpec {
    pub fn constraint_exprs(&self) -> Vec<RationalExpr> {
        self.constraints.iter().map(|c| c.expr.clone()).collect()
    }

    /// Numerators of the `[onshell]` constraints, used as rewrite rules.
    pub fn on_shell_rules(&self) -> Vec<Polynomial> {
        self.on_shell
            .iter()
            .map(|&i| self.constraints[i].expr.numerator().clone())
            .collect()
    }
}

/// Reads and validates a system file.
pub fn load_system(path: &Path) -> Result<SystemSpec, SystemError> {
    let file = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| SystemError::Io {
        file: file.clone(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| SystemError::Validation {
        file: file.clone(),
        line: None,
        message: format!(
            "file is not valid UTF-8 (byte {})",
            e.utf8_error().valid_up_to()
        ),
    })?;
    parse_system(&text, &file)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    System,
    Constraints,
    Hamiltonian,
    Primaries,
    OnShell,
    Sampler,
}

impl Section {
    fn from_name(name: &str) -> Option<Section> {
        Some(match name {
            "system" => Section::System,
            "constraints" => Section::Constraints,
            "hamiltonian" => Section::Hamiltonian,
            "primaries" => Section::Primaries,
            "onshell" => Section::OnShell,
            "sampler" => Section::Sampler,
            _ => return None,
        })
    }
}

/// Expression text waiting for the phase space to be known.
struct Pending {
    name: String,
    text: String,
    line: usize,
    column: usize,
}

#[derive(Default)]
struct Raw {
    saw_system: bool,
    n: Option<(usize, usize)>,
    parameters: Option<(Vec<String>, usize)>,
    bindings: Vec<(String, f64, usize)>,
    constraints: Vec<Pending>,
    hamiltonian: Vec<Pending>,
    primaries: Vec<Pending>,
    on_shell: Vec<(String, usize)>,
    sampler: BTreeMap<&'static str, (String, usize, usize)>,
}

struct Parser<'a> {
    file: &'a str,
}

impl Parser<'_> {
    fn syntax(&self, line: usize, column: usize, message: impl Into<String>) -> SystemError {
        SystemError::Syntax {
            file: self.file.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn invalid(&self, line: Option<usize>, message: impl Into<String>) -> SystemError {
        SystemError::Validation {
            file: self.file.to_string(),
            line,
            message: message.into(),
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `key = value`, returning the value's 1-based column.
fn split_assignment(line: &str, offset: usize) -> Option<(&str, &str, usize)> {
    let eq = line.find('=')?;
    let key = line[..eq].trim();
    let rest = &line[eq + 1..];
    let lead = rest.len() - rest.trim_start().len();
    Some((key, rest.trim(), offset + eq + 1 + lead + 1))
}

/// Parses system-file text. `file` is only used in diagnostics.
pub fn parse_system(text: &str, file: &str) -> Result<SystemSpec, SystemError> {
    let p = Parser { file };
    let mut raw = Raw::default();
    let mut section = None;

    for (idx, full) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = full.split('#').next().unwrap_or("");
        let indent = content.len() - content.trim_start().len();
        let line = content.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| p.syntax(lineno, indent + line.len() + 1, "expected `]`"))?
                .trim();
            let sec = Section::from_name(name)
                .ok_or_else(|| p.syntax(lineno, indent + 2, format!("unknown section `{name}`")))?;
            raw.saw_system |= sec == Section::System;
            section = Some(sec);
            continue;
        }
        let Some(sec) = section else {
            return Err(p.syntax(
                lineno,
                indent + 1,
                "expected a section header such as `[system]`",
            ));
        };
        match sec {
            Section::OnShell => {
                let name = line
                    .strip_prefix("use")
                    .filter(|rest| rest.starts_with(char::is_whitespace))
                    .map(str::trim)
                    .filter(|name| is_identifier(name))
                    .ok_or_else(|| p.syntax(lineno, indent + 1, "expected `use <constraint>`"))?;
                raw.on_shell.push((name.to_string(), lineno));
            }
            Section::System
                if line.starts_with("bind") && line[4..].starts_with(char::is_whitespace) =>
            {
                let (key, value, col) =
                    split_assignment(&line[4..], indent + 4).ok_or_else(|| {
                        p.syntax(lineno, indent + 1, "expected `bind <name> = <value>`")
                    })?;
                if !is_identifier(key) {
                    return Err(p.syntax(lineno, indent + 6, "expected a parameter name"));
                }
                let v: f64 = value
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| {
                        p.syntax(lineno, col, format!("`{value}` is not a finite number"))
                    })?;
                raw.bindings.push((key.to_string(), v, lineno));
            }
            _ => {
                let (key, value, col) = split_assignment(line, indent)
                    .ok_or_else(|| p.syntax(lineno, indent + line.len() + 1, "expected `=`"))?;
                if !is_identifier(key) {
                    return Err(p.syntax(
                        lineno,
                        indent + 1,
                        format!("`{key}` is not a valid name"),
                    ));
                }
                if value.is_empty() {
                    return Err(p.syntax(lineno, col, "missing value"));
                }
                let pending = Pending {
                    name: key.to_string(),
                    text: value.to_string(),
                    line: lineno,
                    column: col,
                };
                match sec {
                    Section::System => system_entry(&p, &mut raw, pending)?,
                    Section::Sampler => sampler_entry(&p, &mut raw, pending)?,
                    Section::Constraints => raw.constraints.push(pending),
                    Section::Hamiltonian => raw.hamiltonian.push(pending),
                    Section::Primaries => raw.primaries.push(pending),
                    Section::OnShell => unreachable!("handled above"),
                }
            }
        }
    }
    build(&p, raw)
}

fn system_entry(p: &Parser<'_>, raw: &mut Raw, e: Pending) -> Result<(), SystemError> {
    match e.name.as_str() {
        "n" => {
            if raw.n.is_some() {
                return Err(p.invalid(Some(e.line), "`n` declared twice"));
            }
            let n: usize = e
                .text
                .parse()
                .map_err(|_| p.syntax(e.line, e.column, format!("`{}` is not a count", e.text)))?;
            raw.n = Some((n, e.line));
        }
        "parameters" => {
            if raw.parameters.is_some() {
                return Err(p.invalid(Some(e.line), "`parameters` declared twice"));
            }
            let names: Vec<String> = e
                .text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            if let Some(bad) = names.iter().find(|s| !is_identifier(s)) {
                return Err(p.syntax(
                    e.line,
                    e.column,
                    format!("`{bad}` is not a valid parameter name"),
                ));
            }
            raw.parameters = Some((names, e.line));
        }
        other => {
            return Err(p.syntax(e.line, 1, format!("unknown key `{other}` in [system]")));
        }
    }
    Ok(())
}

fn sampler_entry(p: &Parser<'_>, raw: &mut Raw, e: Pending) -> Result<(), SystemError> {
    const KEYS: [&str; 5] = [
        "seed",
        "points",
        "tolerance",
        "max_newton_iters",
        "max_retries",
    ];
    let key = KEYS
        .iter()
        .find(|&&k| k == e.name)
        .ok_or_else(|| p.syntax(e.line, 1, format!("unknown key `{}` in [sampler]", e.name)))?;
    if raw
        .sampler
        .insert(key, (e.text, e.line, e.column))
        .is_some()
    {
        return Err(p.invalid(Some(e.line), format!("`{key}` declared twice")));
    }
    Ok(())
}

fn build(p: &Parser<'_>, raw: Raw) -> Result<SystemSpec, SystemError> {
    if !raw.saw_system {
        return Err(p.invalid(None, "missing [system] section"));
    }
    let (n, n_line) = raw
        .n
        .ok_or_else(|| p.invalid(None, "[system] does not declare `n`"))?;
    if n == 0 || n > MAX_PAIRS {
        return Err(p.invalid(
            Some(n_line),
            format!("n must be between 1 and {MAX_PAIRS}, got {n}"),
        ));
    }
    let (parameters, param_line) = raw.parameters.unwrap_or_default();
    let ps = PhaseSpace::with_parameters(n, parameters.iter().cloned())
        .map_err(|e| p.invalid(Some(param_line), e.to_string()))?;

    let mut sampler = SamplerConfig::default();
    for (name, value, line) in raw.bindings {
        if !parameters.contains(&name) {
            return Err(p.invalid(
                Some(line),
                format!("`{name}` is bound but not declared as a parameter"),
            ));
        }
        if sampler.bindings.insert(name.clone(), value).is_some() {
            return Err(p.invalid(Some(line), format!("`{name}` bound twice")));
        }
    }
    for (key, (text, line, column)) in &raw.sampler {
        let bad = || {
            p.syntax(
                *line,
                *column,
                format!("invalid value `{text}` for `{key}`"),
            )
        };
        match *key {
            "seed" => sampler.seed = text.parse().map_err(|_| bad())?,
            "points" => sampler.point_count = text.parse().map_err(|_| bad())?,
            "tolerance" => sampler.tolerance = text.parse().map_err(|_| bad())?,
            "max_newton_iters" => sampler.max_newton_iters = text.parse().map_err(|_| bad())?,
            "max_retries" => sampler.max_retries = text.parse().map_err(|_| bad())?,
            _ => unreachable!("keys are checked on entry"),
        }
    }
    sampler
        .validate()
        .map_err(|e| p.invalid(None, e.to_string()))?;

    let parse_all = |items: Vec<Pending>, what: &str| -> Result<Vec<Named>, SystemError> {
        let mut out: Vec<Named> = Vec::with_capacity(items.len());
        for item in items {
            if let Some(prev) = out.iter().find(|o| o.name == item.name) {
                return Err(p.invalid(
                    Some(item.line),
                    format!(
                        "duplicate {what} name `{}` (first on line {})",
                        item.name, prev.line
                    ),
                ));
            }
            let expr = parse_expression(&item.text, &ps).map_err(|e| expr_error(p, &item, e))?;
            out.push(Named {
                name: item.name,
                expr,
                line: item.line,
            });
        }
        Ok(out)
    };
    let constraints = parse_all(raw.constraints, "constraint")?;
    if constraints.is_empty() {
        return Err(p.invalid(None, "no constraints declared"));
    }
    let mut hamiltonian = parse_all(raw.hamiltonian, "hamiltonian")?;
    if hamiltonian.len() > 1 {
        return Err(p.invalid(
            Some(hamiltonian[1].line),
            "[hamiltonian] holds a single entry",
        ));
    }
    let primaries = parse_all(raw.primaries, "primary")?;

    let mut on_shell = Vec::new();
    for (name, line) in raw.on_shell {
        let idx = constraints
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| {
                p.invalid(Some(line), format!("`{name}` is not a declared constraint"))
            })?;
        if !constraints[idx].expr.is_polynomial() {
            return Err(p.invalid(
                Some(line),
                format!("on-shell rule `{name}` is not a polynomial"),
            ));
        }
        if on_shell.contains(&idx) {
            return Err(p.invalid(Some(line), format!("`{name}` listed twice")));
        }
        on_shell.push(idx);
    }

    Ok(SystemSpec {
        phase_space: ps,
        constraints,
        hamiltonian: hamiltonian.pop(),
        primaries,
        on_shell,
        sampler,
    })
}

fn expr_error(p: &Parser<'_>, item: &Pending, err: CoreError) -> SystemError {
    // Byte offsets in the expression become columns in the file.
    let column_at =
        |offset: usize| item.column + item.text[..offset.min(item.text.len())].chars().count();
    match err {
        CoreError::Syntax { offset, .. } | CoreError::TooLarge { offset, .. } => p.syntax(
            item.line,
            column_at(offset),
            format!("in `{}`: {err}", item.name),
        ),
        CoreError::UnknownSymbol { ref name, offset } => p.invalid(
            Some(item.line),
            format!(
                "in `{}` column {}: unbound symbol `{name}`",
                item.name,
                column_at(offset)
            ),
        ),
        other => p.invalid(Some(item.line), format!("in `{}`: {other}", item.name)),
    }
}
