use std::collections::BTreeMap;
use std::fmt::Write;

use super::{MilpError, MilpModel, Sense, VarType};

const WRAP: usize = 240;

/// LP-format text for `model`.
///
/// Sections appear in the order Minimize, Subject To, Bounds, Binaries,
/// Generals, End; Bounds and Generals only when integer variables exist.
/// Constraints are sorted by tag (stable) and named `{tag}_{k}` with `k`
/// counting within the tag. Variable lists are sorted by name.
pub fn write_lp(model: &MilpModel) -> String {
    let mut out = String::from("Minimize\n");
    if let Some(obj) = &model.objective {
        let mut line = String::from(" obj:");
        push_terms(&mut out, &mut line, model, obj);
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("Subject To\n");
    let mut order: Vec<usize> = (0..model.constraints.len()).collect();
    order.sort_by(|&a, &b| model.constraints[a].tag.cmp(&model.constraints[b].tag));
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    for i in order {
        let c = &model.constraints[i];
        let k = counters.entry(c.tag.as_str()).or_default();
        let mut line = format!(" {}_{}:", c.tag, k);
        *k += 1;
        push_terms(&mut out, &mut line, model, &c.terms);
        let _ = write!(line, " {} {}", c.sense, c.rhs);
        out.push_str(&line);
        out.push('\n');
    }
    let mut sorted: Vec<_> = model.variables.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let generals: Vec<_> = sorted.iter().filter(|v| v.kind == VarType::Integer).collect();
    if !generals.is_empty() {
        out.push_str("Bounds\n");
        for v in &generals {
            let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
        }
    }
    let binaries: Vec<_> = sorted.iter().filter(|v| v.kind == VarType::Binary).collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for v in binaries {
            let _ = writeln!(out, " {}", v.name);
        }
    }
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for v in generals {
            let _ = writeln!(out, " {}", v.name);
        }
    }
    out.push_str("End\n");
    out
}

/// Appends `terms` to `line`, flushing full lines into `out`.
fn push_terms(out: &mut String, line: &mut String, model: &MilpModel, terms: &[(i64, usize)]) {
    for (i, &(c, v)) in terms.iter().enumerate() {
        let name = &model.variables[v].name;
        let mag = c.unsigned_abs();
        let term = match (i, c < 0, mag) {
            (0, false, 1) => name.clone(),
            (0, false, _) => format!("{mag} {name}"),
            (_, neg, 1) => format!("{} {name}", if neg { '-' } else { '+' }),
            (_, neg, _) => format!("{} {mag} {name}", if neg { '-' } else { '+' }),
        };
        if line.len() + term.len() + 1 > WRAP {
            out.push_str(line);
            out.push('\n');
            line.clear();
            line.push_str("  ");
        }
        line.push(' ');
        line.push_str(&term);
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

/// Reads the subset of LP format produced by [`write_lp`]: whitespace
/// separated tokens, `\` comments, signed integer coefficients, bounds of
/// the form `lo <= x <= hi` or `x = v`. Every variable must be declared
/// binary or general, and generals need both bounds.
pub fn parse_lp(text: &str) -> Result<MilpModel, MilpError> {
    let mut section = Section::None;
    // (line, token)
    let mut objective: Option<Vec<(usize, String)>> = None;
    let mut rows: Vec<(usize, String)> = Vec::new();
    let mut bounds: BTreeMap<String, (i64, i64)> = BTreeMap::new();
    let mut binaries = Vec::new();
    let mut generals = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| MilpError::LpSyntax { line: line_no, message: message.to_string() };
        let next = match line.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => Some(Section::Objective),
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" | "bin" => Some(Section::Binaries),
            "generals" | "general" | "gen" => Some(Section::Generals),
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        let tokens = line.split_whitespace().map(|t| (line_no, t.to_string()));
        match section {
            Section::Objective => objective.get_or_insert_with(Vec::new).extend(tokens),
            Section::Constraints => rows.extend(tokens),
            Section::Bounds => {
                let t: Vec<&str> = line.split_whitespace().collect();
                let num = |s: &str| s.parse::<i64>().map_err(|_| err("expected an integer bound"));
                match t.as_slice() {
                    [lo, "<=", x, "<=", hi] => bounds.insert(x.to_string(), (num(lo)?, num(hi)?)),
                    [x, "=", v] => bounds.insert(x.to_string(), (num(v)?, num(v)?)),
                    _ => return Err(err("unsupported bound")),
                };
            }
            Section::Binaries => binaries.extend(line.split_whitespace().map(str::to_string)),
            Section::Generals => generals.extend(line.split_whitespace().map(str::to_string)),
            Section::None => return Err(err("content before the objective section")),
            Section::End => return Err(err("content after End")),
        }
    }
    if section != Section::End {
        return Err(MilpError::LpSyntax { line: text.lines().count(), message: "missing End".into() });
    }

    let mut model = MilpModel::new(0);
    for name in &binaries {
        model.binary(name);
    }
    for name in &generals {
        let &(lo, hi) = bounds.get(name).ok_or_else(|| MilpError::LpSyntax {
            line: 0,
            message: format!("general `{name}` has no finite bounds"),
        })?;
        model.integer(name, lo, hi);
    }
    if let Some(tokens) = objective {
        let body: Vec<(usize, String)> = match tokens.first() {
            Some((_, t)) if t.ends_with(':') => tokens[1..].to_vec(),
            _ => tokens,
        };
        let (terms, rest) = parse_terms(&model, &body)?;
        if let Some((line, t)) = rest.first() {
            return Err(MilpError::LpSyntax { line: *line, message: format!("unexpected `{t}` in objective") });
        }
        model.objective = Some(terms);
    }
    let mut rest: &[Token] = &rows;
    while let Some((line, first)) = rest.first() {
        let (tag, body) = match first.strip_suffix(':') {
            Some(name) => (name.rsplit_once('_').map_or(name, |(t, _)| t).to_string(), &rest[1..]),
            None => (String::from("c"), rest),
        };
        let (terms, after) = parse_terms(&model, body)?;
        let [(_, sense), (_, rhs), tail @ ..] = after else {
            return Err(MilpError::LpSyntax { line: *line, message: "incomplete constraint".into() });
        };
        let sense = match sense.as_str() {
            "<=" | "=<" | "<" => Sense::Le,
            ">=" | "=>" | ">" => Sense::Ge,
            "=" => Sense::Eq,
            s => return Err(MilpError::LpSyntax { line: *line, message: format!("expected a sense, found `{s}`") }),
        };
        let rhs = rhs
            .parse::<i64>()
            .map_err(|_| MilpError::LpSyntax { line: *line, message: format!("bad right-hand side `{rhs}`") })?;
        model.constrain(&tag, terms, sense, rhs);
        rest = tail;
    }
    Ok(model)
}

/// Line number and text.
type Token = (usize, String);

/// Parsed terms and the tokens after them.
type Terms<'a> = (Vec<(i64, usize)>, &'a [Token]);

/// Parses `[+|-] [coef] var ...` up to the first sense token.
fn parse_terms<'a>(model: &MilpModel, tokens: &'a [Token]) -> Result<Terms<'a>, MilpError> {
    let err = |line: usize, message: String| MilpError::LpSyntax { line, message };
    let mut terms = Vec::new();
    let mut i = 0;
    while let Some((line, tok)) = tokens.get(i) {
        if is_sense(tok) {
            break;
        }
        let sign = match tok.as_str() {
            "+" => 1,
            "-" => -1,
            _ if terms.is_empty() => 0,
            _ => return Err(err(*line, format!("expected `+` or `-` before `{tok}`"))),
        };
        if sign != 0 {
            i += 1;
        }
        let mut coef = 1;
        if let Some(c) = tokens.get(i).and_then(|(_, t)| t.parse::<i64>().ok()) {
            coef = c;
            i += 1;
        }
        let (line, name) = tokens.get(i).ok_or_else(|| err(*line, "missing variable".into()))?;
        let v = model.var(name).ok_or_else(|| err(*line, format!("undeclared variable `{name}`")))?;
        terms.push((if sign < 0 { -coef } else { coef }, v));
        i += 1;
    }
    Ok((terms, &tokens[i..]))
}

fn is_sense(t: &str) -> bool {
    matches!(t, "<=" | "=<" | "<" | ">=" | "=>" | ">" | "=")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MilpModel {
        let mut m = MilpModel::new(1);
        let x = m.binary("x");
        let z = m.integer("z", 0, 2);
        let y = m.binary("y");
        m.constrain("b", vec![(1, z), (-2, x)], Sense::Ge, -1);
        m.constrain("a", vec![(1, x), (1, y)], Sense::Le, 1);
        m.constrain("b", vec![(-1, y)], Sense::Eq, 0);
        m
    }

    #[test]
    fn minimal_file_has_four_sections() {
        let mut m = MilpModel::new(0);
        let x = m.binary("x");
        m.constrain("c", vec![(1, x)], Sense::Le, 1);
        assert_eq!(write_lp(&m), "Minimize\nSubject To\n c_0: x <= 1\nBinaries\n x\nEnd\n");
    }

    #[test]
    fn layout() {
        let mut m = small();
        m.objective = Some(vec![(3, 0), (1, 2)]);
        let text = write_lp(&m);
        assert_eq!(
            text,
            "Minimize\n obj: 3 x + y\nSubject To\n a_0: x + y <= 1\n b_0: z - 2 x >= -1\n b_1: - y = 0\n\
Bounds\n 0 <= z <= 2\nBinaries\n x\n y\nGenerals\n z\nEnd\n"
        );
    }

    #[test]
    fn round_trip() {
        let mut m = small();
        m.objective = Some(vec![(1, 2)]);
        let text = write_lp(&m);
        let back = parse_lp(&text).unwrap();
        assert_eq!(write_lp(&back), text);
        assert_eq!(back.constraints.len(), 3);
    }

    #[test]
    fn long_rows_wrap() {
        let mut m = MilpModel::new(0);
        let vars: Vec<usize> = (0..100).map(|i| m.binary(&format!("y_o{i}_t1"))).collect();
        m.constrain("seq", vars.iter().map(|&v| (1, v)).collect(), Sense::Le, 1);
        let text = write_lp(&m);
        assert!(text.lines().all(|l| l.len() <= WRAP));
        assert_eq!(write_lp(&parse_lp(&text).unwrap()), text);
    }

    #[test]
    fn rejects_undeclared_and_unbounded() {
        assert!(parse_lp("Minimize\nSubject To\n c_0: x <= 1\nEnd\n").is_err());
        assert!(parse_lp("Minimize\nSubject To\n c_0: z <= 1\nGenerals\n z\nEnd\n").is_err());
        assert!(parse_lp("Minimize\nSubject To\n c_0: x <= 1\nBinaries\n x\n").is_err());
    }
}
