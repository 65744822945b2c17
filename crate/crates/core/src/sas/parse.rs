use super::{Assignment, Axiom, Effect, MutexGroup, Operator, SasError, SasTask, SasVariable, VarKind};

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    section: &'static str,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        Lines { lines, pos: 0, section: "header" }
    }

    /// Line number of the most recently consumed line.
    fn line_no(&self) -> usize {
        self.lines.get(self.pos.saturating_sub(1)).map_or(0, |l| l.0)
    }

    fn error(&self, message: impl Into<String>) -> SasError {
        SasError::Syntax { line: self.line_no(), section: self.section.to_string(), message: message.into() }
    }

    fn next(&mut self) -> Result<&'a str, SasError> {
        let line = self.lines.get(self.pos).map(|l| l.1).ok_or_else(|| self.error("unexpected end of file"))?;
        self.pos += 1;
        Ok(line)
    }

    fn expect(&mut self, keyword: &str) -> Result<(), SasError> {
        let line = self.next()?;
        if line.trim() != keyword {
            return Err(self.error(format!("expected `{keyword}`, found `{}`", line.trim())));
        }
        Ok(())
    }

    fn ints(&mut self) -> Result<Vec<i64>, SasError> {
        let line = self.next()?;
        line.split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| {
                self.error(format!("expected integers, found `{}`", line.trim()))
            })
    }

    fn int(&mut self) -> Result<i64, SasError> {
        let v = self.ints()?;
        if v.len() != 1 {
            return Err(self.error("expected a single integer"));
        }
        Ok(v[0])
    }

    fn count(&mut self) -> Result<usize, SasError> {
        let v = self.int()?;
        usize::try_from(v).map_err(|_| {
            self.error(format!("expected a non-negative count, found {v}"))
        })
    }

    fn fluent(&mut self, variables: &[SasVariable]) -> Result<Assignment, SasError> {
        let v = self.ints()?;
        if v.len() != 2 {
            return Err(self.error("expected `var value`"));
        }
        let a = self.checked(variables, v[0], v[1])?;
        Ok(a)
    }

    fn checked(&self, variables: &[SasVariable], var: i64, value: i64) -> Result<Assignment, SasError> {
        let var = usize::try_from(var).ok().filter(|&v| v < variables.len());
        let Some(var) = var else {
            return Err(self.error("reference to an undeclared variable"));
        };
        match usize::try_from(value) {
            Ok(value) if value < variables[var].domain_size() => Ok(Assignment::new(var, value)),
            _ => Err(self.error(format!("value {value} out of range for variable {}", variables[var].name))),
        }
    }
}

/// Parses a version-3 `.sas` task and checks its invariants, including
/// stratification of the axioms.
pub fn parse_sas(text: &str) -> Result<SasTask, SasError> {
    let mut lines = Lines::new(text);

    lines.section = "version";
    lines.expect("begin_version")?;
    let version = lines.int()?;
    if version != 3 {
        return Err(SasError::UnsupportedFeature(format!("file format version {version}")));
    }
    lines.expect("end_version")?;

    lines.section = "metric";
    lines.expect("begin_metric")?;
    let use_costs = match lines.int()? {
        0 => false,
        1 => true,
        _ => {
            return Err(lines.error("metric flag must be 0 or 1"));
        }
    };
    lines.expect("end_metric")?;

    lines.section = "variables";
    let nvars = lines.count()?;
    let mut variables = Vec::with_capacity(nvars);
    for id in 0..nvars {
        lines.expect("begin_variable")?;
        let name = lines.next()?.trim().to_string();
        let layer = lines.int()?;
        let kind = match layer {
            -1 => VarKind::Primary,
            l if l >= 0 => VarKind::Secondary { layer: l as u32 },
            _ => {
                return Err(lines.error(format!("bad axiom layer {layer}")));
            }
        };
        let range = lines.count()?;
        if range < 2 {
            return Err(lines.error(format!("variable {name} has range {range}")));
        }
        if kind != VarKind::Primary && range != 2 {
            return Err(SasError::UnsupportedFeature(format!("derived variable {name} has range {range}")));
        }
        let value_names = (0..range).map(|_| lines.next().map(|l| l.trim().to_string())).collect::<Result<_, _>>()?;
        lines.expect("end_variable")?;
        variables.push(SasVariable { id, name, kind, value_names });
    }

    lines.section = "mutex groups";
    let ngroups = lines.count()?;
    let mut mutex_groups = Vec::with_capacity(ngroups);
    for _ in 0..ngroups {
        lines.expect("begin_mutex_group")?;
        let n = lines.count()?;
        let fluents = (0..n).map(|_| lines.fluent(&variables)).collect::<Result<_, _>>()?;
        lines.expect("end_mutex_group")?;
        mutex_groups.push(MutexGroup { fluents });
    }

    lines.section = "state";
    lines.expect("begin_state")?;
    let mut init = Vec::with_capacity(nvars);
    for var in 0..nvars {
        let value = lines.int()?;
        init.push(lines.checked(&variables, var as i64, value)?.value);
    }
    lines.expect("end_state")?;

    lines.section = "goal";
    lines.expect("begin_goal")?;
    let ngoal = lines.count()?;
    let goal = (0..ngoal).map(|_| lines.fluent(&variables)).collect::<Result<_, _>>()?;
    lines.expect("end_goal")?;

    lines.section = "operators";
    let nops = lines.count()?;
    let mut operators = Vec::with_capacity(nops);
    for id in 0..nops {
        lines.expect("begin_operator")?;
        operators.push(parse_operator(&mut lines, &variables, id, use_costs)?);
        lines.expect("end_operator")?;
    }

    lines.section = "axioms";
    let nrules = lines.count()?;
    let mut axioms = Vec::with_capacity(nrules);
    for _ in 0..nrules {
        lines.expect("begin_rule")?;
        axioms.push(parse_rule(&mut lines, &variables)?);
        lines.expect("end_rule")?;
    }
    if lines.pos < lines.lines.len() {
        lines.pos += 1;
        return Err(lines.error("trailing content after the axiom section"));
    }

    let task = SasTask { variables, axioms, operators, mutex_groups, init, goal, use_costs };
    task.validate()?;
    Ok(task)
}

fn parse_operator(
    lines: &mut Lines<'_>,
    variables: &[SasVariable],
    id: usize,
    use_costs: bool,
) -> Result<Operator, SasError> {
    let name = lines.next()?.trim().to_string();
    let mut precondition: Vec<Assignment> = Vec::new();
    let mut require = |lines: &Lines<'_>, a: Assignment| -> Result<(), SasError> {
        match precondition.iter().find(|p| p.var == a.var) {
            Some(p) if p.value != a.value => Err(lines.error(format!("operator {name} requires two values of one variable"))),
            Some(_) => Ok(()),
            None => {
                precondition.push(a);
                Ok(())
            }
        }
    };
    let nprevail = lines.count()?;
    for _ in 0..nprevail {
        let a = lines.fluent(variables)?;
        require(lines, a)?;
    }
    let neffects = lines.count()?;
    let mut effects = Vec::with_capacity(neffects);
    for _ in 0..neffects {
        let v = lines.ints()?;
        let ncond = usize::try_from(*v.first().unwrap_or(&-1)).map_err(|_| lines.error("bad effect line"))?;
        if v.len() != 1 + 2 * ncond + 3 {
            return Err(lines.error("effect line has the wrong number of fields"));
        }
        let condition = v[1..1 + 2 * ncond]
            .chunks(2)
            .map(|c| lines.checked(variables, c[0], c[1]))
            .collect::<Result<Vec<_>, _>>()?;
        let (var, pre, post) = (v[1 + 2 * ncond], v[2 + 2 * ncond], v[3 + 2 * ncond]);
        let affected = lines.checked(variables, var, post)?;
        if pre != -1 {
            let p = lines.checked(variables, var, pre)?;
            require(lines, p)?;
        }
        effects.push(Effect { condition, affected });
    }
    let cost = lines.int()?;
    if cost < 0 {
        return Err(lines.error("negative operator cost"));
    }
    precondition.sort();
    Ok(Operator { id, name, precondition, effects, cost: if use_costs { cost as u64 } else { 1 } })
}

fn parse_rule(lines: &mut Lines<'_>, variables: &[SasVariable]) -> Result<Axiom, SasError> {
    let n = lines.count()?;
    let body: Vec<Assignment> = (0..n).map(|_| lines.fluent(variables)).collect::<Result<_, _>>()?;
    let v = lines.ints()?;
    if v.len() != 3 {
        return Err(lines.error("axiom head must be `var old new`"));
    }
    let head = lines.checked(variables, v[0], v[2])?;
    let var = &variables[head.var];
    if var.is_primary() {
        return Err(SasError::UnsupportedFeature(format!("axiom head {} has no axiom layer", var.name)));
    }
    if v[1] != 0 || v[2] != 1 {
        return Err(SasError::UnsupportedFeature(format!(
            "axiom for {} changes {} to {}; only 0 -> 1 is supported",
            var.name, v[1], v[2]
        )));
    }
    let mut pos_body = Vec::new();
    let mut neg_body = Vec::new();
    for b in body {
        match (variables[b.var].is_primary(), b.value) {
            (true, _) | (false, 1) => pos_body.push(b),
            (false, _) => neg_body.push(Assignment::new(b.var, 1)),
        }
    }
    Ok(Axiom { head, pos_body, neg_body })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::TOY1;
    use super::*;

    #[test]
    fn toy1_parses_field_by_field() {
        let t = parse_sas(TOY1).unwrap();
        assert_eq!(t.variables.len(), 2);
        assert_eq!(t.primary_vars().count(), 1);
        assert_eq!(t.secondary_vars().count(), 1);
        assert_eq!(t.variables[1].kind, VarKind::Secondary { layer: 0 });
        assert_eq!(t.axioms, vec![Axiom { head: Assignment::new(1, 1), pos_body: vec![Assignment::new(0, 1)], neg_body: vec![] }]);
        assert_eq!(t.operators.len(), 1);
        let o = &t.operators[0];
        assert_eq!(o.name, "set_v");
        assert!(o.precondition.is_empty());
        assert_eq!(o.effects, vec![Effect { condition: vec![], affected: Assignment::new(0, 1) }]);
        assert_eq!(o.cost, 1);
        assert_eq!(t.init, vec![0, 0]);
        assert_eq!(t.goal, vec![Assignment::new(1, 1)]);
    }

    #[test]
    fn zero_operator_file() {
        let text = "begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n1\nbegin_variable\nx\n-1\n2\na\nb\nend_variable\n0\nbegin_state\n1\nend_state\nbegin_goal\n1\n0 1\nend_goal\n0\n0\n";
        let t = parse_sas(text).unwrap();
        assert!(t.operators.is_empty());
        assert_eq!(t.goal, vec![Assignment::new(0, 1)]);
    }

    #[test]
    fn axiom_on_primary_head_is_rejected() {
        let text = TOY1.replace("1\nbegin_rule\n1\n0 1\n1 0 1\nend_rule", "1\nbegin_rule\n1\n1 1\n0 0 1\nend_rule");
        assert!(matches!(parse_sas(&text), Err(SasError::UnsupportedFeature(_))));
    }

    #[test]
    fn other_versions_are_unsupported() {
        let text = TOY1.replace("begin_version\n3", "begin_version\n2");
        assert!(matches!(parse_sas(&text), Err(SasError::UnsupportedFeature(_))));
    }

    #[test]
    fn derived_default_one_is_unsupported() {
        let text = TOY1.replace("begin_state\n0\n0\nend_state", "begin_state\n0\n1\nend_state");
        assert!(matches!(parse_sas(&text), Err(SasError::UnsupportedFeature(_))));
    }

    #[test]
    fn axiom_new_value_zero_is_unsupported() {
        let text = TOY1.replace("1 0 1\nend_rule", "1 1 0\nend_rule");
        assert!(matches!(parse_sas(&text), Err(SasError::UnsupportedFeature(_))));
    }

    #[test]
    fn syntax_errors_report_line_and_section() {
        let text = TOY1.replace("begin_goal\n1\n1 1", "begin_goal\n1\n1 x");
        match parse_sas(&text) {
            Err(SasError::Syntax { line, section, .. }) => {
                assert_eq!(section, "goal");
                assert_eq!(line, 29);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        let text = TOY1.replace("0 0 -1 1", "0 0 -1 2");
        assert!(matches!(parse_sas(&text), Err(SasError::Syntax { .. })));
    }

    #[test]
    fn effect_pre_values_become_preconditions() {
        let text = TOY1.replace("0 0 -1 1", "0 0 0 1");
        let t = parse_sas(&text).unwrap();
        assert_eq!(t.operators[0].precondition, vec![Assignment::new(0, 0)]);
    }

    #[test]
    fn unstratified_axioms_are_rejected() {
        // u :- not w. w :- not u.
        let text = "begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n2\n\
begin_variable\nu\n0\n2\nno\nyes\nend_variable\n\
begin_variable\nw\n0\n2\nno\nyes\nend_variable\n0\n\
begin_state\n0\n0\nend_state\nbegin_goal\n1\n0 1\nend_goal\n0\n2\n\
begin_rule\n1\n1 0\n0 0 1\nend_rule\nbegin_rule\n1\n0 0\n1 0 1\nend_rule\n";
        assert!(matches!(parse_sas(text), Err(SasError::Stratification(_))));
    }

    #[test]
    fn metric_costs() {
        let t = parse_sas(&TOY1.replace("begin_metric\n0", "begin_metric\n1").replace("1\nend_operator", "7\nend_operator")).unwrap();
        assert_eq!(t.operators[0].cost, 7);
        let u = parse_sas(&TOY1.replace("1\nend_operator", "7\nend_operator")).unwrap();
        assert_eq!(u.operators[0].cost, 1);
    }
}
