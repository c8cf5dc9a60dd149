//! CNF formulas over 1-based Boolean variables, DIMACS text I/O, evaluation
//! and a small DPLL solver used as classical ground truth.

use std::fmt::{self, Write as _};

use num_rational::Ratio;

use crate::error::{Error, Result};

/// A possibly negated occurrence of a variable. Variables are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: usize,
    negated: bool,
}

impl Literal {
    pub fn new(var: usize, negated: bool) -> Result<Self> {
        if var == 0 {
            return Err(Error::InvalidFormula("variable index 0".into()));
        }
        Ok(Literal { var, negated })
    }

    pub fn positive(var: usize) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal {
            var,
            negated: false,
        }
    }

    pub fn negative(var: usize) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal { var, negated: true }
    }

    /// Builds a literal from its signed DIMACS form (`-3` is the negation of x3).
    pub fn from_dimacs(value: i64) -> Result<Self> {
        if value == 0 {
            return Err(Error::InvalidFormula("literal 0".into()));
        }
        Ok(Literal {
            var: value.unsigned_abs() as usize,
            negated: value < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64;
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn var(self) -> usize {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    pub fn negate(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    /// Truth value of the literal under a variable value.
    pub fn value(self, var_value: bool) -> bool {
        var_value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "!x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// A disjunction of literals over pairwise distinct variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Normalizes the literal list: repeated literals are dropped (first
    /// occurrence kept), tautologies and empty clauses are rejected.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self> {
        let mut out: Vec<Literal> = Vec::new();
        for lit in literals {
            if out.contains(&lit) {
                continue;
            }
            if out.contains(&lit.negate()) {
                return Err(Error::InvalidFormula(format!(
                    "tautological clause contains both {} and {}",
                    lit.negate(),
                    lit
                )));
            }
            out.push(lit);
        }
        if out.is_empty() {
            return Err(Error::InvalidFormula("empty clause".into()));
        }
        Ok(Clause { literals: out })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn width(&self) -> usize {
        self.literals.len()
    }

    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        self.literals
            .iter()
            .any(|l| l.value(a.values[l.var - 1]))
    }
}

/// A conjunction of clauses over variables `1..=num_vars`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidFormula("formula needs at least one variable".into()));
        }
        for (i, c) in clauses.iter().enumerate() {
            if let Some(l) = c.literals.iter().find(|l| l.var > num_vars) {
                return Err(Error::InvalidFormula(format!(
                    "clause {i}: variable {} exceeds declared {num_vars} variables",
                    l.var
                )));
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Convenience constructor from signed DIMACS integers per clause.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i64]]) -> Result<Self> {
        let clauses = clauses
            .iter()
            .map(|c| {
                let lits = c
                    .iter()
                    .map(|&v| Literal::from_dimacs(v))
                    .collect::<Result<Vec<_>>>()?;
                Clause::new(lits)
            })
            .collect::<Result<Vec<_>>>()?;
        CnfFormula::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clause/variable ratio |C| / |X|.
    pub fn alpha(&self) -> Ratio<usize> {
        Ratio::new(self.clauses.len(), self.num_vars)
    }

    /// Total number of literal occurrences.
    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Clause::width).sum()
    }

    /// `Some(k)` when every clause has width k.
    pub fn uniform_width(&self) -> Option<usize> {
        let k = self.clauses.first()?.width();
        self.clauses.iter().all(|c| c.width() == k).then_some(k)
    }

    /// Variables that occur in no clause.
    pub fn uncovered_vars(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_vars + 1];
        for l in self.clauses.iter().flat_map(|c| &c.literals) {
            seen[l.var] = true;
        }
        (1..=self.num_vars).filter(|&v| !seen[v]).collect()
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<bool> {
        if a.len() != self.num_vars {
            return Err(Error::LengthMismatch {
                expected: self.num_vars,
                got: a.len(),
            });
        }
        Ok(self.clauses.iter().all(|c| c.is_satisfied_by(a)))
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            f.write_char('(')?;
            for (j, l) in c.literals.iter().enumerate() {
                if j > 0 {
                    f.write_str(" | ")?;
                }
                write!(f, "{l}")?;
            }
            f.write_char(')')?;
        }
        Ok(())
    }
}

/// Values of variables `1..=n`, stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn all_false(num_vars: usize) -> Self {
        Assignment {
            values: vec![false; num_vars],
        }
    }

    /// Low `num_vars` bits of `mask`; bit `v-1` holds variable `v`.
    pub fn from_mask(mask: u64, num_vars: usize) -> Self {
        Assignment {
            values: (0..num_vars).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of 1-based variable `var`.
    pub fn get(&self, var: usize) -> bool {
        self.values[var - 1]
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.values[var - 1] = value;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

pub fn evaluate(f: &CnfFormula, a: &Assignment) -> Result<bool> {
    f.evaluate(a)
}

/// Parses DIMACS CNF. Clauses may span lines; each ends at a `0` token.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<(Literal, usize)> = Vec::new();
    let mut clause_line = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::parse(line_no, "duplicate header"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(Error::parse(line_no, "malformed header, expected `p cnf V C`"));
            }
            let v = fields[2]
                .parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("bad variable count `{}`", fields[2])))?;
            let c = fields[3]
                .parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("bad clause count `{}`", fields[3])))?;
            if v == 0 {
                return Err(Error::parse(line_no, "variable count must be positive"));
            }
            header = Some((v, c, line_no));
            continue;
        }
        let Some((num_vars, _, _)) = header else {
            return Err(Error::parse(line_no, "clause before `p cnf` header"));
        };
        for tok in line.split_whitespace() {
            let value: i64 = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad literal `{tok}`")))?;
            if current.is_empty() {
                clause_line = line_no;
            }
            if value == 0 {
                if current.is_empty() {
                    return Err(Error::parse(line_no, "empty clause"));
                }
                let lits = current.drain(..).map(|(l, _)| l);
                let clause = Clause::new(lits).map_err(|e| Error::parse(clause_line, e.to_string()))?;
                clauses.push(clause);
                continue;
            }
            let lit = Literal::from_dimacs(value).map_err(|e| Error::parse(line_no, e.to_string()))?;
            if lit.var() > num_vars {
                return Err(Error::parse(
                    line_no,
                    format!("literal {value}: index {} exceeds declared {num_vars} variables", lit.var()),
                ));
            }
            current.push((lit, line_no));
        }
    }

    let Some((num_vars, num_clauses, header_line)) = header else {
        return Err(Error::parse(last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(Error::parse(clause_line, "clause missing terminating 0"));
    }
    if clauses.len() != num_clauses {
        return Err(Error::parse(
            header_line,
            format!("header declares {num_clauses} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::new(num_vars, clauses)
}

/// Writes the formula as DIMACS CNF, one clause per line.
pub fn emit_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars, f.clauses.len());
    for c in &f.clauses {
        for l in &c.literals {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

/// Outcome of [`dpll_satisfiable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatResult {
    pub witness: Option<Assignment>,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        self.witness.is_some()
    }
}

/// Complete DPLL search: unit propagation, pure-literal elimination and
/// branching on the first unassigned variable of an open clause.
pub fn dpll_satisfiable(f: &CnfFormula) -> SatResult {
    let mut assign = vec![None; f.num_vars + 1];
    let witness = dpll(&f.clauses, &mut assign).then(|| {
        Assignment::new((1..=f.num_vars).map(|v| assign[v].unwrap_or(false)).collect())
    });
    SatResult { witness }
}

enum ClauseState {
    Satisfied,
    Conflict,
    Unit(Literal),
    Open,
}

fn clause_state(c: &Clause, assign: &[Option<bool>]) -> ClauseState {
    let mut free = None;
    let mut free_count = 0;
    for &l in &c.literals {
        match assign[l.var] {
            Some(v) if l.value(v) => return ClauseState::Satisfied,
            Some(_) => {}
            None => {
                free_count += 1;
                free = Some(l);
            }
        }
    }
    match (free_count, free) {
        (0, _) => ClauseState::Conflict,
        (1, Some(l)) => ClauseState::Unit(l),
        _ => ClauseState::Open,
    }
}

fn dpll(clauses: &[Clause], assign: &mut Vec<Option<bool>>) -> bool {
    loop {
        let mut changed = false;

        // unit propagation
        for c in clauses {
            match clause_state(c, assign) {
                ClauseState::Conflict => return false,
                ClauseState::Unit(l) => {
                    assign[l.var] = Some(!l.negated);
                    changed = true;
                }
                _ => {}
            }
        }
        if changed {
            continue;
        }

        // pure literals: bit 0 = seen positive, bit 1 = seen negative
        let mut polarity = vec![0u8; assign.len()];
        let mut open = false;
        for c in clauses {
            if matches!(clause_state(c, assign), ClauseState::Satisfied) {
                continue;
            }
            open = true;
            for l in &c.literals {
                if assign[l.var].is_none() {
                    polarity[l.var] |= if l.negated { 2 } else { 1 };
                }
            }
        }
        if !open {
            return true;
        }
        for (v, &p) in polarity.iter().enumerate() {
            if p == 1 || p == 2 {
                assign[v] = Some(p == 1);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let branch_var = clauses
        .iter()
        .filter(|c| !matches!(clause_state(c, assign), ClauseState::Satisfied))
        .flat_map(|c| c.literals.iter().map(|l| l.var))
        .filter(|&v| assign[v].is_none())
        .min()
        .expect("open clause without free variable would have been a conflict");

    for value in [true, false] {
        let mut trial = assign.clone();
        trial[branch_var] = Some(value);
        if dpll(clauses, &mut trial) {
            *assign = trial;
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig3() -> CnfFormula {
        CnfFormula::from_dimacs_clauses(4, &[&[-2, -3, 4], &[1, 2, 4], &[-1, 3, -4]]).unwrap()
    }

    fn brute_force_sat(f: &CnfFormula) -> bool {
        (0..1u64 << f.num_vars()).any(|m| {
            let a = Assignment::from_mask(m, f.num_vars());
            f.clauses()
                .iter()
                .all(|c| c.literals().iter().any(|l| a.get(l.var()) != l.is_negated()))
        })
    }

    #[test]
    fn parses_example_formula() {
        let f = parse_dimacs("p cnf 4 3\n-2 -3 4 0\n1 2 4 0\n-1 3 -4 0\n").unwrap();
        assert_eq!(f, fig3());
        assert_eq!(f.uniform_width(), Some(3));
        assert_eq!(f.alpha(), Ratio::new(3, 4));
    }

    #[test]
    fn parses_unit_clause_and_comments() {
        let f = parse_dimacs("c hello\np cnf 1 1\n1 0\n").unwrap();
        assert_eq!(f.num_clauses(), 1);
        assert_eq!(f.clauses()[0].literals(), &[Literal::positive(1)]);
    }

    #[test]
    fn rejects_out_of_range_literal() {
        let err = parse_dimacs("p cnf 2 1\n1 -3 0\n").unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("exceeds declared 2"), "{msg}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert!(matches!(parse_dimacs("p cnf x 1\n1 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_dimacs("1 2 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_dimacs("p cnf 2 2\n1 2 0\n"), Err(Error::Parse { .. })));
        // tautology
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 -1 2 0\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn duplicate_literals_are_merged() {
        let f = parse_dimacs("p cnf 2 1\n1 1 2 0\n").unwrap();
        assert_eq!(f.clauses()[0].width(), 2);
    }

    #[test]
    fn multi_line_clause() {
        let f = parse_dimacs("p cnf 3 1\n1 2\n3 0\n").unwrap();
        assert_eq!(f.clauses()[0].width(), 3);
    }

    #[test]
    fn emit_round_trip() {
        let f = fig3();
        assert_eq!(parse_dimacs(&emit_dimacs(&f)).unwrap(), f);
        let empty = CnfFormula::new(5, vec![]).unwrap();
        assert_eq!(emit_dimacs(&empty), "p cnf 5 0\n");
        assert_eq!(parse_dimacs(&emit_dimacs(&empty)).unwrap(), empty);
    }

    #[test]
    fn evaluate_example_assignment() {
        let a = Assignment::new(vec![true, false, true, false]);
        assert!(fig3().evaluate(&a).unwrap());
        let bad = Assignment::new(vec![true; 3]);
        assert!(matches!(fig3().evaluate(&bad), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn contradiction_is_unsat() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        for m in 0..2 {
            assert!(!f.evaluate(&Assignment::from_mask(m, 1)).unwrap());
        }
        assert!(!dpll_satisfiable(&f).is_sat());
    }

    #[test]
    fn dpll_finds_witness_for_example() {
        let f = fig3();
        assert!(brute_force_sat(&f));
        let r = dpll_satisfiable(&f);
        assert!(f.evaluate(r.witness.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn dpll_matches_enumeration_on_all_sign_patterns() {
        // three clauses over the triple (x1, x2, x3), every sign pattern
        let triples = [[1, 2, 3], [1, 2, 3], [1, 2, 3]];
        for signs in 0u32..1 << 9 {
            let clauses: Vec<Vec<i64>> = triples
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    t.iter()
                        .enumerate()
                        .map(|(j, &v)| if signs >> (3 * i + j) & 1 == 1 { -v } else { v })
                        .collect()
                })
                .collect();
            let refs: Vec<&[i64]> = clauses.iter().map(Vec::as_slice).collect();
            let f = CnfFormula::from_dimacs_clauses(3, &refs).unwrap();
            let r = dpll_satisfiable(&f);
            assert_eq!(r.is_sat(), brute_force_sat(&f));
            if let Some(w) = r.witness {
                assert!(f.evaluate(&w).unwrap());
            }
        }
    }

    #[test]
    fn dpll_matches_enumeration_on_random_formulas() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..400 {
            let n = rng.gen_range(1..=12);
            let m = rng.gen_range(1..=5 * n);
            let mut clauses = Vec::new();
            while clauses.len() < m {
                let width = rng.gen_range(1..=3.min(n));
                let vars = rand::seq::index::sample(&mut rng, n, width);
                let lits = vars.iter().map(|v| Literal::new(v + 1, rng.gen()).unwrap());
                clauses.push(Clause::new(lits).unwrap());
            }
            let f = CnfFormula::new(n, clauses).unwrap();
            let r = dpll_satisfiable(&f);
            assert_eq!(r.is_sat(), brute_force_sat(&f), "{f}");
            if let Some(w) = r.witness {
                assert!(f.evaluate(&w).unwrap());
            }
        }
    }

    #[test]
    fn uncovered_variables_are_flagged() {
        let f = parse_dimacs("p cnf 4 1\n1 -3 0\n").unwrap();
        assert_eq!(f.uncovered_vars(), vec![2, 4]);
    }
}
