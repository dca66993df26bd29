//! Scenario scripts: a line-oriented, sectioned `key = value` format.
//!
//! ```text
//! [systems]
//! spin = 2
//! lab = 2
//!
//! [init]
//! spin = plus
//!
//! [steps]
//! measure = cx spin -> lab
//! undo = invert measure
//!
//! [partition]
//! A = lab
//! C = spin
//! R =
//!
//! [reports]
//! columns = S_C, mutual_AC, S_global
//! require = global-purity
//! expect.measure.S_C = 1
//! ```
//!
//! [`parse_script`] validates both syntax and meaning; [`render`] is the
//! canonical serializer, and `parse_script(&render(s)) == s` for every valid
//! script.

use std::fmt;

use num_complex::Complex64;
use qledger::states::checked_dim;
use qledger::tol::TOL_PROB;

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioScript {
    pub systems: Vec<SystemDecl>,
    /// Explicit initial states; undeclared systems start in `|0>`.
    pub init: Vec<(String, InitSpec)>,
    pub steps: Vec<Step>,
    pub partition: Option<PartitionSpec>,
    pub reports: Reports,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemDecl {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Basis(usize),
    Plus,
    Minus,
    /// Equal superposition of all basis states.
    Uniform,
    /// Haar-random, drawn from the run seed.
    Random,
    /// Explicit amplitudes, normalized at run time.
    Amplitudes(Vec<Complex64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
}

impl Gate {
    const ALL: [Gate; 7] = [Gate::I, Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::S, Gate::T];

    pub fn name(self) -> &'static str {
        match self {
            Gate::I => "i",
            Gate::X => "x",
            Gate::Y => "y",
            Gate::Z => "z",
            Gate::H => "h",
            Gate::S => "s",
            Gate::T => "t",
        }
    }

    fn from_name(s: &str) -> Option<Gate> {
        Gate::ALL.into_iter().find(|g| g.name() == s)
    }

    /// Whether the gate is defined on a system of dimension `dim`.
    pub fn fits(self, dim: usize) -> bool {
        self == Gate::I || dim == 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlledGate {
    X,
    Z,
}

impl ControlledGate {
    pub fn name(self) -> &'static str {
        match self {
            ControlledGate::X => "cx",
            ControlledGate::Z => "cz",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureBasis {
    Z,
    X,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operation {
    Gate { gate: Gate, target: String },
    /// One control, applied to each target in turn.
    Controlled {
        gate: ControlledGate,
        control: String,
        targets: Vec<String>,
    },
    /// Haar-random unitary on the joint space of `systems`.
    Haar { systems: Vec<String> },
    /// Random-unitary map `rho -> sum_n p_n G_n rho G_n^dag`.
    Mix {
        system: String,
        branches: Vec<(f64, Gate)>,
    },
    /// Projective measurement whose outcome is re-prepared in the same basis.
    Measure { system: String, basis: MeasureBasis },
    /// Inverse of an earlier unitary step.
    Invert { step: String },
}

impl Operation {
    pub fn is_unitary(&self) -> bool {
        !matches!(self, Operation::Mix { .. } | Operation::Measure { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub label: String,
    pub op: Operation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    pub a: Vec<String>,
    pub c: Vec<String>,
    pub r: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    SA,
    SC,
    SR,
    SAC,
    SGlobal,
    MutualAC,
    Residual,
}

impl Column {
    pub const ALL: [Column; 7] = [
        Column::SA,
        Column::SC,
        Column::SR,
        Column::SAC,
        Column::SGlobal,
        Column::MutualAC,
        Column::Residual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::SA => "S_A",
            Column::SC => "S_C",
            Column::SR => "S_R",
            Column::SAC => "S_AC",
            Column::SGlobal => "S_global",
            Column::MutualAC => "mutual_AC",
            Column::Residual => "residual",
        }
    }

    fn from_name(s: &str) -> Option<Column> {
        Column::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn needs_partition(self) -> bool {
        self != Column::SGlobal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Requirement {
    /// `S_global <= tolerance` on every row.
    GlobalPurity,
    /// `|residual| <= tolerance` on every step.
    Balance,
}

impl Requirement {
    pub fn name(self) -> &'static str {
        match self {
            Requirement::GlobalPurity => "global-purity",
            Requirement::Balance => "balance",
        }
    }

    fn from_name(s: &str) -> Option<Requirement> {
        [Requirement::GlobalPurity, Requirement::Balance]
            .into_iter()
            .find(|r| r.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    /// A step label or `init`.
    pub step: String,
    pub column: Column,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Reports {
    pub columns: Option<Vec<Column>>,
    pub require: Vec<Requirement>,
    pub tolerance: Option<f64>,
    pub expectations: Vec<Expectation>,
}

impl Reports {
    pub const DEFAULT_TOLERANCE: f64 = 1e-9;

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(Self::DEFAULT_TOLERANCE)
    }
}

impl ScenarioScript {
    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn system_index(&self, name: &str) -> Option<usize> {
        self.systems.iter().position(|s| s.name == name)
    }

    /// Columns to report, defaulting to all that the partition allows.
    pub fn columns(&self) -> Vec<Column> {
        match (&self.reports.columns, &self.partition) {
            (Some(cols), _) => cols.clone(),
            (None, Some(_)) => Column::ALL.to_vec(),
            (None, None) => vec![Column::SGlobal],
        }
    }
}

/// The label of the row before any step.
pub const INIT_LABEL: &str = "init";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

/// A located parse failure; `code` is stable and machine-readable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptError {
    pub kind: ErrorKind,
    pub code: &'static str,
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Syntax => "syntax",
            ErrorKind::Semantic => "semantic",
        };
        write!(f, "{}:{}: {kind} error [{}]: {}", self.line, self.column, self.code, self.message)
    }
}

impl std::error::Error for ScriptError {}

type PResult<T> = Result<T, ScriptError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, code: &'static str, message: impl Into<String>) -> ScriptError {
    ScriptError {
        kind: ErrorKind::Syntax,
        code,
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn semantic(pos: Pos, code: &'static str, message: impl Into<String>) -> ScriptError {
    ScriptError {
        kind: ErrorKind::Semantic,
        code,
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Systems,
    Init,
    Steps,
    Partition,
    Reports,
}

impl Section {
    const ALL: [Section; 5] = [
        Section::Systems,
        Section::Init,
        Section::Steps,
        Section::Partition,
        Section::Reports,
    ];

    fn name(self) -> &'static str {
        match self {
            Section::Systems => "systems",
            Section::Init => "init",
            Section::Steps => "steps",
            Section::Partition => "partition",
            Section::Reports => "reports",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Comma,
    Arrow,
    Colon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Colon => "`:`".into(),
        }
    }
}

/// A `key = value` line with positions.
struct Entry {
    key: String,
    key_pos: Pos,
    value: String,
    value_pos: Pos,
}

impl Entry {
    fn tokens(&self) -> PResult<Tokens> {
        tokenize(&self.value, self.value_pos)
    }
}

struct Tokens {
    items: Vec<(Tok, Pos)>,
    next: usize,
    end: Pos,
}

impl Tokens {
    fn peek(&self) -> Option<&Tok> {
        self.items.get(self.next).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.items.get(self.next).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn is_done(&self) -> bool {
        self.next >= self.items.len()
    }

    fn word(&mut self, expected: &str) -> PResult<(String, Pos)> {
        match self.items.get(self.next) {
            Some((Tok::Word(w), p)) => {
                self.next += 1;
                Ok((w.clone(), *p))
            }
            Some((t, p)) => Err(syntax(*p, "unexpected-token", format!("expected {expected}, found {}", t.describe()))),
            None => Err(syntax(self.end, "unexpected-end", format!("expected {expected}, found end of line"))),
        }
    }

    fn ident(&mut self, expected: &str) -> PResult<(String, Pos)> {
        let (w, p) = self.word(expected)?;
        if !is_ident(&w) {
            return Err(syntax(p, "bad-identifier", format!("expected {expected}, found `{w}`")));
        }
        Ok((w, p))
    }

    fn punct(&mut self, tok: Tok) -> PResult<()> {
        match self.items.get(self.next) {
            Some((t, _)) if *t == tok => {
                self.next += 1;
                Ok(())
            }
            Some((t, p)) => Err(syntax(*p, "unexpected-token", format!("expected {}, found {}", tok.describe(), t.describe()))),
            None => Err(syntax(self.end, "unexpected-end", format!("expected {}, found end of line", tok.describe()))),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.next += 1;
            true
        } else {
            false
        }
    }

    fn finish(&self) -> PResult<()> {
        match self.items.get(self.next) {
            None => Ok(()),
            Some((t, p)) => Err(syntax(*p, "trailing-input", format!("expected end of line, found {}", t.describe()))),
        }
    }

    /// Comma-separated identifiers, possibly none.
    fn ident_list(&mut self, expected: &str) -> PResult<Vec<(String, Pos)>> {
        let mut out = Vec::new();
        if self.is_done() {
            return Ok(out);
        }
        loop {
            out.push(self.ident(expected)?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.finish()?;
        Ok(out)
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn tokenize(text: &str, start: Pos) -> PResult<Tokens> {
    let chars: Vec<char> = text.chars().collect();
    let mut items = Vec::new();
    let mut i = 0;
    let at = |i: usize| Pos {
        line: start.line,
        column: start.column + i,
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == ',' {
            items.push((Tok::Comma, at(i)));
            i += 1;
        } else if c == ':' {
            items.push((Tok::Colon, at(i)));
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            items.push((Tok::Arrow, at(i)));
            i += 2;
        } else if c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '+') {
            let begin = i;
            while i < chars.len() {
                let d = chars[i];
                let sign = matches!(d, '-' | '+') && chars.get(i + 1) != Some(&'>');
                if d.is_ascii_alphanumeric() || matches!(d, '_' | '.') || sign {
                    i += 1;
                } else {
                    break;
                }
            }
            items.push((Tok::Word(chars[begin..i].iter().collect()), at(begin)));
        } else {
            return Err(syntax(at(i), "unexpected-character", format!("unexpected character `{c}`")));
        }
    }
    Ok(Tokens {
        items,
        next: 0,
        end: at(chars.len()),
    })
}

fn parse_f64(s: &str, pos: Pos) -> PResult<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && !s.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') => Ok(v),
        _ => Err(syntax(pos, "bad-number", format!("expected a finite number, found `{s}`"))),
    }
}

fn parse_count(s: &str, pos: Pos, what: &str) -> PResult<usize> {
    if !s.chars().all(|c| c.is_ascii_digit()) {
        return Err(syntax(pos, "bad-number", format!("expected {what}, found `{s}`")));
    }
    s.parse::<usize>()
        .map_err(|_| syntax(pos, "bad-number", format!("expected {what}, found `{s}`")))
}

/// `a`, `bi`, `a+bi` or `a-bi`.
fn parse_complex(s: &str, pos: Pos) -> PResult<Complex64> {
    let bad = || syntax(pos, "bad-number", format!("expected a complex amplitude, found `{s}`"));
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(parse_f64(s, pos)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_f64(&body[..k], pos).map_err(|_| bad())?, parse_f64(&body[k..], pos).map_err(|_| bad())?),
        None => (0.0, parse_f64(body, pos).map_err(|_| bad())?),
    };
    Ok(Complex64::new(re, im))
}

fn render_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

struct RawSection {
    section: Section,
    pos: Pos,
    entries: Vec<Entry>,
}

fn split_lines(text: &str) -> PResult<Vec<RawSection>> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (n, raw_line) in text.lines().enumerate() {
        let line = n + 1;
        let content = match raw_line.find('#') {
            Some(k) => &raw_line[..k],
            None => raw_line,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.chars().take_while(|c| c.is_whitespace()).count();
        let pos = Pos { line, column: indent + 1 };
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(syntax(pos, "bad-section", "expected `]` closing the section header"));
            };
            let name = name.trim();
            let Some(section) = Section::ALL.into_iter().find(|s| s.name() == name) else {
                return Err(syntax(
                    pos,
                    "unknown-section",
                    format!("unknown section `{name}`, expected one of systems, init, steps, partition, reports"),
                ));
            };
            if sections.iter().any(|s| s.section == section) {
                return Err(syntax(pos, "duplicate-section", format!("section `{name}` appears twice")));
            }
            sections.push(RawSection {
                section,
                pos,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(current) = sections.last_mut() else {
            return Err(syntax(pos, "entry-outside-section", "expected a section header such as `[systems]`"));
        };
        let Some(eq) = content.find('=') else {
            return Err(syntax(pos, "expected-equals", "expected `key = value`"));
        };
        let key = content[..eq].trim().to_string();
        if key.is_empty() {
            return Err(syntax(pos, "missing-key", "expected a key before `=`"));
        }
        let after = &content[eq + 1..];
        let value_offset = content[..eq + 1].chars().count() + after.chars().take_while(|c| c.is_whitespace()).count();
        current.entries.push(Entry {
            key,
            key_pos: pos,
            value: after.trim().to_string(),
            value_pos: Pos {
                line,
                column: value_offset + 1,
            },
        });
    }
    Ok(sections)
}

/// Parses and validates a script.
pub fn parse_script(text: &str) -> Result<ScenarioScript, ScriptError> {
    let sections = split_lines(text)?;
    let find = |s: Section| sections.iter().find(|r| r.section == s);
    let origin = Pos { line: 1, column: 1 };

    let Some(systems_raw) = find(Section::Systems) else {
        return Err(semantic(origin, "missing-systems", "a `[systems]` section is required"));
    };
    let systems = parse_systems(systems_raw)?;
    let mut script = ScenarioScript {
        systems,
        init: Vec::new(),
        steps: Vec::new(),
        partition: None,
        reports: Reports::default(),
    };
    if let Some(raw) = find(Section::Init) {
        script.init = parse_init(raw, &script)?;
    }
    if let Some(raw) = find(Section::Steps) {
        script.steps = parse_steps(raw, &script)?;
    }
    if let Some(raw) = find(Section::Partition) {
        script.partition = Some(parse_partition(raw, &script)?);
    }
    if let Some(raw) = find(Section::Reports) {
        script.reports = parse_reports(raw, &script)?;
    }
    Ok(script)
}

fn key_ident(entry: &Entry, what: &str) -> PResult<String> {
    if !is_ident(&entry.key) {
        return Err(syntax(entry.key_pos, "bad-identifier", format!("expected {what}, found `{}`", entry.key)));
    }
    Ok(entry.key.clone())
}

fn parse_systems(raw: &RawSection) -> PResult<Vec<SystemDecl>> {
    let mut out: Vec<SystemDecl> = Vec::new();
    for entry in &raw.entries {
        let name = key_ident(entry, "a system name")?;
        if out.iter().any(|s| s.name == name) {
            return Err(semantic(entry.key_pos, "duplicate-system", format!("system `{name}` declared twice")));
        }
        let mut toks = entry.tokens()?;
        let (w, p) = toks.word("a dimension")?;
        let dim = parse_count(&w, p, "a dimension")?;
        if dim == 0 {
            return Err(semantic(p, "dimension-mismatch", format!("system `{name}` has dimension 0")));
        }
        toks.finish()?;
        out.push(SystemDecl { name, dim });
    }
    if out.is_empty() {
        return Err(semantic(raw.pos, "missing-systems", "`[systems]` declares no systems"));
    }
    let dims: Vec<usize> = out.iter().map(|s| s.dim).collect();
    if let Err(e) = checked_dim(&dims) {
        return Err(semantic(raw.pos, "resource-guard", e.to_string()));
    }
    Ok(out)
}

fn lookup(script: &ScenarioScript, name: &str, pos: Pos) -> PResult<usize> {
    script
        .system_index(name)
        .ok_or_else(|| semantic(pos, "undeclared-system", format!("undeclared system `{name}`")))
}

fn parse_init(raw: &RawSection, script: &ScenarioScript) -> PResult<Vec<(String, InitSpec)>> {
    let mut out: Vec<(String, InitSpec)> = Vec::new();
    for entry in &raw.entries {
        let name = key_ident(entry, "a system name")?;
        let dim = script.systems[lookup(script, &name, entry.key_pos)?].dim;
        if out.iter().any(|(n, _)| *n == name) {
            return Err(semantic(entry.key_pos, "duplicate-init", format!("system `{name}` initialized twice")));
        }
        let value = entry.value.as_str();
        let spec = if let Some(inner) = value.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return Err(syntax(entry.value_pos, "unexpected-end", "expected `]` closing the amplitude list"));
            };
            let inner_pos = Pos {
                line: entry.value_pos.line,
                column: entry.value_pos.column + 1,
            };
            let mut toks = tokenize(inner, inner_pos)?;
            let mut amps = Vec::new();
            if !toks.is_done() {
                loop {
                    let (w, p) = toks.word("an amplitude")?;
                    amps.push(parse_complex(&w, p)?);
                    if !toks.eat(&Tok::Comma) {
                        break;
                    }
                }
                toks.finish()?;
            }
            if amps.len() != dim {
                return Err(semantic(
                    entry.value_pos,
                    "dimension-mismatch",
                    format!("system `{name}` has dimension {dim} but {} amplitudes were given", amps.len()),
                ));
            }
            if amps.iter().all(|a| a.norm_sqr() == 0.0) {
                return Err(semantic(entry.value_pos, "invalid-amplitudes", "amplitudes are all zero"));
            }
            InitSpec::Amplitudes(amps)
        } else {
            let mut toks = entry.tokens()?;
            let (w, p) = toks.word("an initial state")?;
            toks.finish()?;
            let spec = match w.as_str() {
                "plus" => InitSpec::Plus,
                "minus" => InitSpec::Minus,
                "uniform" => InitSpec::Uniform,
                "random" => InitSpec::Random,
                _ if w.chars().all(|c| c.is_ascii_digit()) => {
                    let k = parse_count(&w, p, "a basis index")?;
                    if k >= dim {
                        return Err(semantic(
                            p,
                            "dimension-mismatch",
                            format!("basis index {k} out of range for `{name}` of dimension {dim}"),
                        ));
                    }
                    InitSpec::Basis(k)
                }
                _ => {
                    return Err(syntax(
                        p,
                        "unexpected-token",
                        format!("expected a basis index, plus, minus, uniform, random or `[...]`, found `{w}`"),
                    ))
                }
            };
            if matches!(spec, InitSpec::Plus | InitSpec::Minus) && dim != 2 {
                return Err(semantic(p, "dimension-mismatch", format!("`{w}` needs a qubit but `{name}` has dimension {dim}")));
            }
            spec
        };
        out.push((name, spec));
    }
    Ok(out)
}

fn parse_steps(raw: &RawSection, script: &ScenarioScript) -> PResult<Vec<Step>> {
    let mut steps: Vec<Step> = Vec::new();
    for entry in &raw.entries {
        let label = key_ident(entry, "a step label")?;
        if label == INIT_LABEL {
            return Err(semantic(entry.key_pos, "reserved-label", format!("`{INIT_LABEL}` is reserved for the initial row")));
        }
        if steps.iter().any(|s| s.label == label) {
            return Err(semantic(entry.key_pos, "duplicate-step", format!("step `{label}` defined twice")));
        }
        let op = parse_operation(entry, script, &steps)?;
        steps.push(Step { label, op });
    }
    Ok(steps)
}

fn qubit(script: &ScenarioScript, name: &str, pos: Pos, what: &str) -> PResult<()> {
    let dim = script.systems[lookup(script, name, pos)?].dim;
    if dim != 2 {
        return Err(semantic(pos, "dimension-mismatch", format!("{what} needs a qubit but `{name}` has dimension {dim}")));
    }
    Ok(())
}

fn distinct(items: &[(String, Pos)]) -> PResult<()> {
    for (k, (name, pos)) in items.iter().enumerate() {
        if items[..k].iter().any(|(n, _)| n == name) {
            return Err(semantic(*pos, "repeated-system", format!("system `{name}` listed twice")));
        }
    }
    Ok(())
}

fn parse_operation(entry: &Entry, script: &ScenarioScript, earlier: &[Step]) -> PResult<Operation> {
    let mut toks = entry.tokens()?;
    let (op, op_pos) = toks.word("an operation")?;
    if let Some(gate) = Gate::from_name(&op) {
        let (target, p) = toks.ident("a system name")?;
        toks.finish()?;
        let dim = script.systems[lookup(script, &target, p)?].dim;
        if !gate.fits(dim) {
            return Err(semantic(p, "dimension-mismatch", format!("gate `{op}` needs a qubit but `{target}` has dimension {dim}")));
        }
        return Ok(Operation::Gate { gate, target });
    }
    match op.as_str() {
        "cx" | "cnot" | "cz" => {
            let gate = if op == "cz" { ControlledGate::Z } else { ControlledGate::X };
            let (control, cp) = toks.ident("a control system")?;
            qubit(script, &control, cp, &format!("`{op}`"))?;
            toks.punct(Tok::Arrow)?;
            let targets = toks.ident_list("a target system")?;
            if targets.is_empty() {
                return Err(syntax(toks.pos(), "unexpected-end", "expected a target system, found end of line"));
            }
            distinct(&targets)?;
            for (t, p) in &targets {
                qubit(script, t, *p, &format!("`{op}`"))?;
                if *t == control {
                    return Err(semantic(*p, "repeated-system", format!("`{t}` is both control and target")));
                }
            }
            Ok(Operation::Controlled {
                gate,
                control,
                targets: targets.into_iter().map(|(t, _)| t).collect(),
            })
        }
        "haar" => {
            let systems = toks.ident_list("a system name")?;
            if systems.is_empty() {
                return Err(syntax(toks.pos(), "unexpected-end", "expected a system name, found end of line"));
            }
            distinct(&systems)?;
            for (s, p) in &systems {
                lookup(script, s, *p)?;
            }
            Ok(Operation::Haar {
                systems: systems.into_iter().map(|(s, _)| s).collect(),
            })
        }
        "mix" => {
            let (system, sp) = toks.ident("a system name")?;
            let dim = script.systems[lookup(script, &system, sp)?].dim;
            toks.punct(Tok::Colon)?;
            let mut branches = Vec::new();
            let mut total = 0.0;
            loop {
                let (w, p) = toks.word("a probability")?;
                let prob = parse_f64(&w, p)?;
                if prob < 0.0 {
                    return Err(semantic(p, "bad-distribution", format!("negative probability {w}")));
                }
                let (g, gp) = toks.word("a gate")?;
                let Some(gate) = Gate::from_name(&g) else {
                    return Err(syntax(gp, "unexpected-token", format!("expected one of i, x, y, z, h, s, t, found `{g}`")));
                };
                if !gate.fits(dim) {
                    return Err(semantic(gp, "dimension-mismatch", format!("gate `{g}` needs a qubit but `{system}` has dimension {dim}")));
                }
                total += prob;
                branches.push((prob, gate));
                if !toks.eat(&Tok::Comma) {
                    break;
                }
            }
            toks.finish()?;
            if (total - 1.0).abs() > TOL_PROB {
                return Err(semantic(entry.value_pos, "bad-distribution", format!("mixture probabilities sum to {total}")));
            }
            Ok(Operation::Mix { system, branches })
        }
        "measure" => {
            let (system, sp) = toks.ident("a system name")?;
            let dim = script.systems[lookup(script, &system, sp)?].dim;
            let (b, bp) = toks.word("a basis (z or x)")?;
            toks.finish()?;
            let basis = match b.as_str() {
                "z" => MeasureBasis::Z,
                "x" => MeasureBasis::X,
                _ => return Err(syntax(bp, "unexpected-token", format!("expected a basis (z or x), found `{b}`"))),
            };
            if basis == MeasureBasis::X && dim != 2 {
                return Err(semantic(bp, "dimension-mismatch", format!("x basis needs a qubit but `{system}` has dimension {dim}")));
            }
            Ok(Operation::Measure { system, basis })
        }
        "invert" => {
            let (step, p) = toks.ident("a step label")?;
            toks.finish()?;
            let Some(target) = earlier.iter().find(|s| s.label == step) else {
                return Err(semantic(p, "unknown-step", format!("no earlier step `{step}`")));
            };
            if !target.op.is_unitary() {
                return Err(semantic(p, "not-invertible", format!("step `{step}` is not unitary")));
            }
            Ok(Operation::Invert { step })
        }
        _ => Err(syntax(
            op_pos,
            "unknown-operation",
            format!("unknown operation `{op}`, expected one of i, x, y, z, h, s, t, cx, cnot, cz, haar, mix, measure, invert"),
        )),
    }
}

fn parse_partition(raw: &RawSection, script: &ScenarioScript) -> PResult<PartitionSpec> {
    let mut blocks: [Option<Vec<String>>; 3] = [None, None, None];
    let mut seen: Vec<String> = Vec::new();
    for entry in &raw.entries {
        let k = match entry.key.as_str() {
            "A" => 0,
            "C" => 1,
            "R" => 2,
            other => {
                return Err(syntax(entry.key_pos, "unknown-key", format!("expected A, C or R, found `{other}`")));
            }
        };
        if blocks[k].is_some() {
            return Err(semantic(entry.key_pos, "duplicate-key", format!("block `{}` given twice", entry.key)));
        }
        let names = entry.tokens()?.ident_list("a system name")?;
        for (name, pos) in &names {
            lookup(script, name, *pos)?;
            if seen.contains(name) {
                return Err(semantic(*pos, "non-covering-partition", format!("system `{name}` assigned to two blocks")));
            }
            seen.push(name.clone());
        }
        blocks[k] = Some(names.into_iter().map(|(n, _)| n).collect());
    }
    let [a, c, r] = blocks;
    let (a, c, r) = (a.unwrap_or_default(), c.unwrap_or_default(), r.unwrap_or_default());
    if a.is_empty() || c.is_empty() {
        return Err(semantic(raw.pos, "non-covering-partition", "blocks A and C must be non-empty"));
    }
    if let Some(missing) = script.systems.iter().find(|s| !seen.contains(&s.name)) {
        return Err(semantic(
            raw.pos,
            "non-covering-partition",
            format!("system `{}` is not assigned to A, C or R", missing.name),
        ));
    }
    Ok(PartitionSpec { a, c, r })
}

fn parse_reports(raw: &RawSection, script: &ScenarioScript) -> PResult<Reports> {
    let mut reports = Reports::default();
    let mut seen_keys: Vec<String> = Vec::new();
    let labels: Vec<&str> = std::iter::once(INIT_LABEL)
        .chain(script.steps.iter().map(|s| s.label.as_str()))
        .collect();
    let column = |name: &str, pos: Pos| -> PResult<Column> {
        let col = Column::from_name(name).ok_or_else(|| {
            syntax(
                pos,
                "unknown-column",
                format!("unknown column `{name}`, expected one of S_A, S_C, S_R, S_AC, S_global, mutual_AC, residual"),
            )
        })?;
        if col.needs_partition() && script.partition.is_none() {
            return Err(semantic(pos, "missing-partition", format!("column `{name}` needs a `[partition]` section")));
        }
        Ok(col)
    };
    for entry in &raw.entries {
        if seen_keys.contains(&entry.key) {
            return Err(semantic(entry.key_pos, "duplicate-key", format!("`{}` given twice", entry.key)));
        }
        seen_keys.push(entry.key.clone());
        match entry.key.as_str() {
            "columns" => {
                let names = entry.tokens()?.ident_list("a column name")?;
                let mut cols: Vec<Column> = Vec::new();
                for (name, pos) in &names {
                    let col = column(name, *pos)?;
                    if cols.contains(&col) {
                        return Err(semantic(*pos, "duplicate-column", format!("column `{name}` listed twice")));
                    }
                    cols.push(col);
                }
                reports.columns = Some(cols);
            }
            "require" => {
                let mut toks = entry.tokens()?;
                let mut require = Vec::new();
                if !toks.is_done() {
                    loop {
                        let (w, p) = toks.word("a requirement")?;
                        let Some(req) = Requirement::from_name(&w) else {
                            return Err(syntax(p, "unknown-requirement", format!("expected global-purity or balance, found `{w}`")));
                        };
                        if req == Requirement::Balance && script.partition.is_none() {
                            return Err(semantic(p, "missing-partition", "`balance` needs a `[partition]` section"));
                        }
                        if require.contains(&req) {
                            return Err(semantic(p, "duplicate-requirement", format!("`{w}` listed twice")));
                        }
                        require.push(req);
                        if !toks.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    toks.finish()?;
                }
                reports.require = require;
            }
            "tolerance" => {
                let mut toks = entry.tokens()?;
                let (w, p) = toks.word("a tolerance")?;
                toks.finish()?;
                let tol = parse_f64(&w, p)?;
                if tol < 0.0 {
                    return Err(semantic(p, "bad-tolerance", "tolerance must be non-negative"));
                }
                reports.tolerance = Some(tol);
            }
            key => {
                let parts: Vec<&str> = key.split('.').collect();
                let ["expect", step, col] = parts.as_slice() else {
                    return Err(syntax(
                        entry.key_pos,
                        "unknown-key",
                        format!("expected columns, require, tolerance or expect.<step>.<column>, found `{key}`"),
                    ));
                };
                if !labels.contains(step) {
                    return Err(semantic(entry.key_pos, "unknown-step", format!("no step `{step}`")));
                }
                let col = column(col, entry.key_pos)?;
                let mut toks = entry.tokens()?;
                let (w, p) = toks.word("an expected value")?;
                toks.finish()?;
                reports.expectations.push(Expectation {
                    step: step.to_string(),
                    column: col,
                    value: parse_f64(&w, p)?,
                });
            }
        }
    }
    Ok(reports)
}

/// Canonical text of a script.
pub fn render(script: &ScenarioScript) -> String {
    let mut out = String::new();
    out.push_str("[systems]\n");
    for s in &script.systems {
        out.push_str(&format!("{} = {}\n", s.name, s.dim));
    }
    out.push_str("\n[init]\n");
    for (name, spec) in &script.init {
        let value = match spec {
            InitSpec::Basis(k) => k.to_string(),
            InitSpec::Plus => "plus".into(),
            InitSpec::Minus => "minus".into(),
            InitSpec::Uniform => "uniform".into(),
            InitSpec::Random => "random".into(),
            InitSpec::Amplitudes(a) => format!("[{}]", a.iter().map(|z| render_complex(*z)).collect::<Vec<_>>().join(", ")),
        };
        out.push_str(&format!("{name} = {value}\n"));
    }
    out.push_str("\n[steps]\n");
    for step in &script.steps {
        out.push_str(&format!("{} = {}\n", step.label, step.op));
    }
    if let Some(p) = &script.partition {
        out.push_str("\n[partition]\n");
        for (block, names) in [("A", &p.a), ("C", &p.c), ("R", &p.r)] {
            if names.is_empty() {
                out.push_str(&format!("{block} =\n"));
            } else {
                out.push_str(&format!("{block} = {}\n", names.join(", ")));
            }
        }
    }
    out.push_str("\n[reports]\n");
    let r = &script.reports;
    if let Some(cols) = &r.columns {
        let names: Vec<&str> = cols.iter().map(|c| c.name()).collect();
        out.push_str(&format!("columns = {}\n", names.join(", ")).replace(" \n", "\n"));
    }
    if !r.require.is_empty() {
        let names: Vec<&str> = r.require.iter().map(|q| q.name()).collect();
        out.push_str(&format!("require = {}\n", names.join(", ")));
    }
    if let Some(t) = r.tolerance {
        out.push_str(&format!("tolerance = {t:e}\n"));
    }
    for e in &r.expectations {
        out.push_str(&format!("expect.{}.{} = {}\n", e.step, e.column.name(), e.value));
    }
    out
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Gate { gate, target } => write!(f, "{} {target}", gate.name()),
            Operation::Controlled { gate, control, targets } => {
                write!(f, "{} {control} -> {}", gate.name(), targets.join(", "))
            }
            Operation::Haar { systems } => write!(f, "haar {}", systems.join(", ")),
            Operation::Mix { system, branches } => {
                let parts: Vec<String> = branches.iter().map(|(p, g)| format!("{p} {}", g.name())).collect();
                write!(f, "mix {system} : {}", parts.join(", "))
            }
            Operation::Measure { system, basis } => {
                let b = match basis {
                    MeasureBasis::Z => "z",
                    MeasureBasis::X => "x",
                };
                write!(f, "measure {system} {b}")
            }
            Operation::Invert { step } => write!(f, "invert {step}"),
        }
    }
}
