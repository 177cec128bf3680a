//! The `.crn` text format.
//!
//! ```text
//! # comment
//! species: X1 X2          (optional; fixes the species order)
//! X1 -> 2 X2 @ 2.0
//! 2 X2 <-> X1 @ 1.0, 0.5  (forward, backward)
//! 0 -> X1 @ 1e-3          (0 is the empty complex)
//! ```
//!
//! Without a header, species are numbered in order of first appearance.

use std::fmt;

use thiserror::Error;

use crate::net::{is_species_name, CountVector, Network, Transition};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticCode {
    Syntax,
    Rate,
    UnknownSpecies,
    Empty,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::Syntax => "E_SYNTAX",
            DiagnosticCode::Rate => "E_RATE",
            DiagnosticCode::UnknownSpecies => "E_UNKNOWN_SPECIES",
            DiagnosticCode::Empty => "E_EMPTY",
        }
    }
}

/// A positioned message; `line` and `column` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub code: DiagnosticCode,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}[{}]: {}", self.line, self.column, self.code.as_str(), self.message)
    }
}

/// Parsing failed; holds every error found (and any warnings).
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseError {
    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    /// Code of the first error.
    pub fn code(&self) -> &'static str {
        self.errors().next().map(|d| d.code.as_str()).unwrap_or("E_SYNTAX")
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.errors().map(|d| d.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

#[derive(Debug, Clone)]
pub struct ParsedNetwork<T> {
    pub network: Network<T>,
    pub warnings: Vec<ParseDiagnostic>,
}

struct Term {
    coeff: u64,
    name: String,
    column: usize,
}

struct Reaction<T> {
    line: usize,
    lhs: Vec<Term>,
    rhs: Vec<Term>,
    rates: Vec<T>,
    reversible: bool,
}

struct LineParser<'a> {
    text: &'a str,
    line: usize,
    /// byte offset of `text` within the original line
    base: usize,
    pos: usize,
}

impl<'a> LineParser<'a> {
    fn column(&self, at: usize) -> usize {
        self.base + at + 1
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text.as_bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn error(&self, at: usize, code: DiagnosticCode, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic {
            line: self.line,
            column: self.column(at),
            code,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.pos < self.text.len() && f(self.text.as_bytes()[self.pos]) {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn complex(&mut self) -> Result<Vec<Term>, ParseDiagnostic> {
        self.skip_ws();
        if self.text[self.pos..].trim_end() == "0" {
            self.pos = self.text.len();
            return Ok(Vec::new());
        }
        let mut terms = Vec::new();
        loop {
            self.skip_ws();
            let term_start = self.pos;
            let digits = self.take_while(|b| b.is_ascii_digit());
            let coeff = if digits.is_empty() {
                1
            } else {
                match digits.parse::<u64>() {
                    Ok(0) => {
                        return Err(self.error(term_start, DiagnosticCode::Syntax, "coefficient must be positive"))
                    }
                    Ok(c) => c,
                    Err(_) => return Err(self.error(term_start, DiagnosticCode::Syntax, "coefficient out of range")),
                }
            };
            self.skip_ws();
            let name_start = self.pos;
            let name = self.take_while(|b| b.is_ascii_alphanumeric() || b == b'_');
            if !is_species_name(name) {
                let msg = if name.is_empty() {
                    "expected species name".to_string()
                } else {
                    format!("invalid species name `{name}`")
                };
                return Err(self.error(name_start, DiagnosticCode::Syntax, msg));
            }
            terms.push(Term { coeff, name: name.to_string(), column: self.column(name_start) });
            self.skip_ws();
            if self.at_end() {
                return Ok(terms);
            }
            if self.text.as_bytes()[self.pos] == b'+' {
                self.pos += 1;
            } else {
                return Err(self.error(
                    self.pos,
                    DiagnosticCode::Syntax,
                    format!("unexpected `{}`", &self.text[self.pos..]),
                ));
            }
        }
    }
}

fn is_decimal(s: &str) -> bool {
    let s = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let (int, frac) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    let digits = |x: &str| x.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() && frac.is_empty() || !digits(int) || !digits(frac) {
        return false;
    }
    match exponent {
        None => true,
        Some(e) => {
            let e = e.strip_prefix(['+', '-']).unwrap_or(e);
            !e.is_empty() && digits(e)
        }
    }
}

fn parse_rate<T: Real>(tok: &str, line: usize, column: usize) -> Result<T, ParseDiagnostic> {
    let err = |message: String| ParseDiagnostic {
        line,
        column,
        code: DiagnosticCode::Rate,
        severity: Severity::Error,
        message,
    };
    if tok.is_empty() {
        return Err(err("missing rate".into()));
    }
    if !is_decimal(tok) {
        return Err(err(format!("unparsable rate `{tok}`")));
    }
    let value: T = tok.parse().map_err(|_| err(format!("unparsable rate `{tok}`")))?;
    if !value.is_finite() {
        return Err(err(format!("rate `{tok}` is out of range")));
    }
    if !(value > T::zero()) {
        return Err(err(format!("rate must be positive, got `{tok}`")));
    }
    Ok(value)
}

fn parse_reaction<T: Real>(content: &str, line: usize) -> Result<Reaction<T>, ParseDiagnostic> {
    let syntax = |col: usize, msg: &str| ParseDiagnostic {
        line,
        column: col,
        code: DiagnosticCode::Syntax,
        severity: Severity::Error,
        message: msg.to_string(),
    };
    let at = content.find('@').ok_or_else(|| syntax(content.len() + 1, "expected `@ RATE`"))?;
    let (head, tail) = (&content[..at], &content[at + 1..]);

    let (arrow_at, arrow_len, reversible) = match (head.find("<->"), head.find("->")) {
        (Some(i), _) => (i, 3, true),
        (None, Some(i)) => (i, 2, false),
        _ => return Err(syntax(1, "expected `->` or `<->`")),
    };
    let rest = &head[arrow_at + arrow_len..];
    if rest.contains("->") || rest.contains("<-") {
        return Err(syntax(arrow_at + arrow_len + rest.find('-').unwrap_or(0), "more than one arrow"));
    }

    let mut lhs_p = LineParser { text: &head[..arrow_at], line, base: 0, pos: 0 };
    let lhs = lhs_p.complex()?;
    let mut rhs_p = LineParser { text: rest, line, base: arrow_at + arrow_len, pos: 0 };
    let rhs = rhs_p.complex()?;

    let mut rates = Vec::new();
    let mut offset = at + 1;
    for piece in tail.split(',') {
        let lead = piece.len() - piece.trim_start().len();
        let tok = piece.trim();
        if tok.contains(char::is_whitespace) {
            return Err(syntax(offset + lead + 1, "unexpected text after rate"));
        }
        rates.push(parse_rate::<T>(tok, line, offset + lead + 1)?);
        offset += piece.len() + 1;
    }
    let expected = if reversible { 2 } else { 1 };
    if rates.len() != expected {
        return Err(syntax(
            at + 1,
            if reversible { "`<->` needs exactly two rates" } else { "`->` takes exactly one rate" },
        ));
    }
    Ok(Reaction { line, lhs, rhs, rates, reversible })
}

/// Parses `.crn` text.
pub fn parse_network<T: Real>(text: &str) -> Result<ParsedNetwork<T>, ParseError> {
    let mut diags: Vec<ParseDiagnostic> = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut reactions: Vec<Reaction<T>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(names) = content.trim_start().strip_prefix("species:") {
            let column = indent + 1;
            if header.is_some() {
                diags.push(ParseDiagnostic {
                    line,
                    column,
                    code: DiagnosticCode::Syntax,
                    severity: Severity::Error,
                    message: "duplicate `species:` header".into(),
                });
                continue;
            }
            if !reactions.is_empty() {
                diags.push(ParseDiagnostic {
                    line,
                    column,
                    code: DiagnosticCode::Syntax,
                    severity: Severity::Error,
                    message: "`species:` header must precede all reactions".into(),
                });
                continue;
            }
            let mut list: Vec<String> = Vec::new();
            let mut ok = true;
            let mut cursor = indent + "species:".len();
            for word in names.split_whitespace() {
                let rel = content[cursor..].find(word).unwrap_or(0);
                let col = cursor + rel + 1;
                cursor += rel + word.len();
                if !is_species_name(word) {
                    diags.push(ParseDiagnostic {
                        line,
                        column: col,
                        code: DiagnosticCode::Syntax,
                        severity: Severity::Error,
                        message: format!("invalid species name `{word}`"),
                    });
                    ok = false;
                } else if list.iter().any(|s| s == word) {
                    diags.push(ParseDiagnostic {
                        line,
                        column: col,
                        code: DiagnosticCode::Syntax,
                        severity: Severity::Error,
                        message: format!("species `{word}` declared twice"),
                    });
                    ok = false;
                } else {
                    list.push(word.to_string());
                }
            }
            header = Some(if ok { list } else { Vec::new() });
            continue;
        }
        match parse_reaction::<T>(content, line) {
            Ok(r) => reactions.push(r),
            Err(d) => diags.push(d),
        }
    }

    let explicit = header.is_some();
    let mut species = header.unwrap_or_default();
    for r in &reactions {
        for term in r.lhs.iter().chain(&r.rhs) {
            if !species.iter().any(|s| s == &term.name) {
                if explicit {
                    diags.push(ParseDiagnostic {
                        line: r.line,
                        column: term.column,
                        code: DiagnosticCode::UnknownSpecies,
                        severity: Severity::Error,
                        message: format!("species `{}` is not declared in the header", term.name),
                    });
                } else {
                    species.push(term.name.clone());
                }
            }
        }
    }

    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(ParseError { diagnostics: diags });
    }

    let k = species.len();
    let vector = |terms: &[Term]| {
        let mut v = vec![0u64; k];
        for t in terms {
            let i = species.iter().position(|s| s == &t.name).expect("checked above");
            v[i] += t.coeff;
        }
        CountVector(v)
    };
    let mut transitions = Vec::new();
    for r in &reactions {
        let (lhs, rhs) = (vector(&r.lhs), vector(&r.rhs));
        transitions.push(Transition::new(lhs.clone(), rhs.clone(), r.rates[0]));
        if r.reversible {
            transitions.push(Transition::new(rhs, lhs, r.rates[1]));
        }
    }
    if transitions.is_empty() {
        diags.push(ParseDiagnostic {
            line: 1,
            column: 1,
            code: DiagnosticCode::Empty,
            severity: Severity::Warning,
            message: "no reactions".into(),
        });
    }
    let network = Network::new(species, transitions).map_err(|e| ParseError {
        diagnostics: vec![ParseDiagnostic {
            line: 1,
            column: 1,
            code: DiagnosticCode::Syntax,
            severity: Severity::Error,
            message: e.to_string(),
        }],
    })?;
    Ok(ParsedNetwork { network, warnings: diags })
}

/// Shortest decimal that parses back to the same value.
pub fn format_rate<T: Real>(rate: T) -> String {
    let a = rate.abs();
    if a != T::zero() && (a >= T::lit(1e16) || a < T::lit(1e-5)) {
        format!("{rate:e}")
    } else {
        format!("{rate}")
    }
}

fn format_complex(c: &CountVector, species: &[String]) -> String {
    let terms: Vec<String> =
        c.0.iter()
            .zip(species)
            .filter(|(&n, _)| n > 0)
            .map(|(&n, s)| if n == 1 { s.clone() } else { format!("{n} {s}") })
            .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Canonical text: header, then one `->` line per transition. No trailing newline.
pub fn format_network<T: Real>(net: &Network<T>) -> String {
    let mut lines = Vec::with_capacity(net.transitions().len() + 1);
    let header =
        if net.species().is_empty() { "species:".to_string() } else { format!("species: {}", net.species().join(" ")) };
    lines.push(header);
    for t in net.transitions() {
        lines.push(format!(
            "{} -> {} @ {}",
            format_complex(&t.input, net.species()),
            format_complex(&t.output, net.species()),
            format_rate(t.rate)
        ));
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn parse(s: &str) -> Result<Network<f64>, ParseError> {
        parse_network::<f64>(s).map(|p| p.network)
    }

    fn first_error(s: &str) -> ParseDiagnostic {
        parse(s).unwrap_err().errors().next().unwrap().clone()
    }

    #[test]
    fn parses_diatomic() {
        let net = parse("X1 -> 2 X2 @ 2.0\n2 X2 -> X1 @ 1.0").unwrap();
        assert_eq!(net, fixtures::diatomic(2.0, 1.0));
    }

    #[test]
    fn zero_is_the_empty_complex() {
        let net = parse("0 -> A @ 3.0").unwrap();
        assert_eq!(net.transitions().len(), 1);
        assert!(net.transitions()[0].input.is_zero());
        assert_eq!(net.transitions()[0].output.0, vec![1]);
    }

    #[test]
    fn negative_rate_is_reported_at_rate_token() {
        let d = first_error("A -> B @ -1");
        assert_eq!(d.code, DiagnosticCode::Rate);
        assert_eq!((d.line, d.column), (1, 10));
    }

    #[test]
    fn zero_and_garbage_rates() {
        assert_eq!(first_error("A -> B @ 0").code, DiagnosticCode::Rate);
        assert_eq!(first_error("A -> B @ fast").code, DiagnosticCode::Rate);
        assert_eq!(first_error("A -> B @ inf").code, DiagnosticCode::Rate);
        assert_eq!(first_error("A -> B @ 1e999").code, DiagnosticCode::Rate);
        assert_eq!(first_error("A -> B @").code, DiagnosticCode::Rate);
    }

    #[test]
    fn scientific_notation_rates() {
        let net = parse("A -> B @ 2.5e-3\nB -> A @ .5\nA -> 0 @ 3E2").unwrap();
        assert_eq!(net.rates(), vec![2.5e-3, 0.5, 300.0]);
    }

    #[test]
    fn reversible_expands_to_two() {
        let net = parse("A + B <-> C @ 1, 2").unwrap();
        assert_eq!(net.transitions().len(), 2);
        assert_eq!(net.transitions()[1].input.0, vec![0, 0, 1]);
        assert_eq!(net.transitions()[1].rate, 2.0);
        assert_eq!(first_error("A <-> B @ 1").code, DiagnosticCode::Syntax);
        assert_eq!(first_error("A -> B @ 1, 2").code, DiagnosticCode::Syntax);
    }

    #[test]
    fn repeated_species_are_summed() {
        assert_eq!(parse("A + A -> B @ 1").unwrap(), parse("2 A -> B @ 1").unwrap());
    }

    #[test]
    fn duplicate_lines_stay_distinct() {
        assert_eq!(parse("A -> B @ 1\nA -> B @ 1").unwrap().transitions().len(), 2);
    }

    #[test]
    fn header_fixes_order_and_rejects_unknown() {
        let net = parse("species: B A\nA -> B @ 1").unwrap();
        assert_eq!(net.species(), &["B".to_string(), "A".to_string()]);
        let d = first_error("species: A\nA -> C @ 1");
        assert_eq!(d.code, DiagnosticCode::UnknownSpecies);
        assert_eq!((d.line, d.column), (2, 6));
    }

    #[test]
    fn header_keeps_unused_species() {
        let net = parse("species: A B Z\nA -> B @ 1").unwrap();
        assert_eq!(net.num_species(), 3);
    }

    #[test]
    fn comments_and_blank_lines() {
        let net = parse("# diatomic\n\nX1 -> 2 X2 @ 2 # split\n   \n2X2 -> X1 @ 1\n").unwrap();
        assert_eq!(net, fixtures::diatomic(2.0, 1.0));
    }

    #[test]
    fn syntax_errors_have_positions() {
        for src in
            ["A B -> C @ 1", "A -> @ 1", "A -> B", "0 + A -> B @ 1", "A -> 0B @ 1", "A -> B -> C @ 1", "A => B @ 1"]
        {
            let err = parse(src).unwrap_err();
            let d = err.errors().next().unwrap();
            assert_eq!(d.code, DiagnosticCode::Syntax, "{src}");
            assert!(d.line >= 1 && d.column >= 1);
        }
        assert_eq!(first_error("A -> B @ 1 2").code, DiagnosticCode::Syntax);
    }

    #[test]
    fn collects_errors_from_every_line() {
        let err = parse("A -> B @ -1\nC -> @ 1\nD -> E @ 1").unwrap_err();
        let lines: Vec<usize> = err.errors().map(|d| d.line).collect();
        assert_eq!(lines, vec![1, 2]);
    }

    #[test]
    fn empty_input_warns() {
        let p = parse_network::<f64>("# nothing\n").unwrap();
        assert!(p.network.transitions().is_empty());
        assert_eq!(p.warnings[0].code, DiagnosticCode::Empty);
        assert_eq!(p.warnings[0].severity, Severity::Warning);
    }

    #[test]
    fn formats_birth_death() {
        let net = fixtures::birth_death(1.0, 1.0);
        assert_eq!(format_network(&net), "species: A\n0 -> A @ 1\nA -> 0 @ 1");
    }

    #[test]
    fn formats_fractional_rate() {
        let net = fixtures::diatomic(2.5, 1.0);
        assert_eq!(format_network(&net).lines().nth(1).unwrap(), "X1 -> 2 X2 @ 2.5");
    }

    #[test]
    fn catalyst_round_trip() {
        let net = fixtures::catalyst([1.0, 0.25, 3e-7, 1.5e20]);
        let text = format_network(&net);
        assert!(text.contains("AC -> 2 B + C @ 150000000000000000000") || text.contains("AC -> 2 B + C @ 1.5e20"));
        assert_eq!(parse(&text).unwrap(), net);
    }

    #[test]
    fn f32_round_trip() {
        let net = fixtures::diatomic::<f32>(0.1, 3.3);
        let back = parse_network::<f32>(&format_network(&net)).unwrap().network;
        assert_eq!(back, net);
    }
}
