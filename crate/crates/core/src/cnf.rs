//! CNF formulas, the Tseytin encoding of circuits, and DIMACS I/O.
//!
//! The encoding assigns every endogenous fact its own variable (the variable
//! id equals the fact id) and numbers auxiliary gate variables after the
//! largest endogenous fact id. Every internal gate `g` with auxiliary
//! variable `z` is defined by biconditional clauses:
//!
//! * Or: `(¬z ∨ c1 ∨ … ∨ cm)` and `(z ∨ ¬ci)` for each child,
//! * And: `(¬z ∨ ci)` for each child and `(z ∨ ¬c1 ∨ … ∨ ¬cm)`,
//! * Not: `(z ∨ c)` and `(¬z ∨ ¬c)`,
//! * constants: a unit clause pinning `z`.
//!
//! Variable gates reuse the fact's variable and emit no clauses. A unit
//! clause asserts the output gate's variable. Only gates reachable from the
//! output are encoded.
//!
//! The result is equisatisfiable with the circuit in a strong sense: the
//! formula's variables are the circuit's variables plus the auxiliary set
//! `Z`, every satisfying assignment of the circuit extends to exactly one
//! satisfying assignment of the formula, and non-satisfying assignments
//! extend to none. [`check_equisatisfiable`] verifies all of that by
//! enumeration on small inputs.
//!
//! # DIMACS dialect
//!
//! Standard `p cnf V C` header and zero-terminated clauses. Comment lines
//! `c endo <var> <label>` declare which variables are endogenous facts; all
//! other variables are auxiliary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::circuit::{BooleanCircuit, Gate};
use crate::lineage::{Assignment, Database, Fact, FactId};
use crate::{Error, Result};

/// Largest combined variable count (circuit variables plus auxiliary
/// variables) for which [`check_equisatisfiable`] is allowed.
pub const MAX_EQUISAT_CHECK_VARS: usize = 24;

/// A CNF variable, `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal: a variable with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    pub var: VarId,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: VarId) -> Self {
        Lit {
            var,
            positive: true,
        }
    }

    pub fn neg(var: VarId) -> Self {
        Lit {
            var,
            positive: false,
        }
    }

    pub fn negate(self) -> Self {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var.0 as i64;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(value: i64) -> Result<Self> {
        if value == 0 || value.unsigned_abs() > u32::MAX as u64 {
            return Err(Error::Parse {
                line: 0,
                message: format!("invalid literal {value}"),
            });
        }
        Ok(Lit {
            var: VarId(value.unsigned_abs() as u32),
            positive: value > 0,
        })
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals.
pub type Clause = Vec<Lit>;

/// Maps CNF variables to endogenous facts. A variable is an endogenous fact
/// variable iff it is declared here (the variable id equals the fact id);
/// everything else is auxiliary.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VarMap {
    labels: BTreeMap<VarId, String>,
}

impl VarMap {
    /// One variable per endogenous fact of the database, label included.
    pub fn for_database(db: &Database) -> Self {
        let labels = db
            .facts()
            .filter(|f| db.is_endogenous(f.id))
            .map(|f| (VarId(f.id.0), f.label.clone()))
            .collect();
        VarMap { labels }
    }

    pub fn declare(&mut self, var: VarId, label: impl Into<String>) {
        self.labels.insert(var, label.into());
    }

    pub fn is_endogenous(&self, var: VarId) -> bool {
        self.labels.contains_key(&var)
    }

    pub fn fact_of(&self, var: VarId) -> Option<FactId> {
        self.labels.contains_key(&var).then_some(FactId(var.0))
    }

    pub fn var_of(&self, fact: FactId) -> Option<VarId> {
        let var = VarId(fact.0);
        self.labels.contains_key(&var).then_some(var)
    }

    pub fn label(&self, var: VarId) -> Option<&str> {
        self.labels.get(&var).map(|s| s.as_str())
    }

    /// Declared endogenous variables in ascending order.
    pub fn endo_vars(&self) -> Vec<VarId> {
        self.labels.keys().copied().collect()
    }

    /// The endogenous facts as a database (all facts endogenous).
    pub fn endo_database(&self) -> Database {
        Database::new(
            self.labels
                .iter()
                .map(|(v, label)| Fact::endo(v.0, label.clone())),
        )
        .expect("variable ids are unique and nonzero")
    }

    pub fn without(&self, var: VarId) -> VarMap {
        let mut labels = self.labels.clone();
        labels.remove(&var);
        VarMap { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A CNF formula with its fact/auxiliary variable map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    var_map: VarMap,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>, var_map: VarMap) -> Result<Self> {
        for clause in &clauses {
            for lit in clause {
                if lit.var.0 == 0 || lit.var.0 > num_vars {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("literal {lit} out of range 1..={num_vars}"),
                    });
                }
            }
        }
        for var in var_map.endo_vars() {
            if var.0 > num_vars {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("endogenous variable {var} out of range"),
                });
            }
        }
        Ok(CnfFormula {
            num_vars,
            clauses,
            var_map,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn var_map(&self) -> &VarMap {
        &self.var_map
    }

    /// Auxiliary variables mentioned by some clause, ascending.
    pub fn aux_vars(&self) -> Vec<VarId> {
        let mut aux = BTreeSet::new();
        for clause in &self.clauses {
            for lit in clause {
                if !self.var_map.is_endogenous(lit.var) {
                    aux.insert(lit.var);
                }
            }
        }
        aux.into_iter().collect()
    }

    /// All variables mentioned by some clause, ascending.
    pub fn mentioned_vars(&self) -> Vec<VarId> {
        let mut vars = BTreeSet::new();
        for clause in &self.clauses {
            for lit in clause {
                vars.insert(lit.var);
            }
        }
        vars.into_iter().collect()
    }

    /// Evaluates the formula with the given set of true variables.
    pub fn evaluate(&self, true_vars: &BTreeSet<VarId>) -> bool {
        self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|lit| lit.positive == true_vars.contains(&lit.var))
        })
    }

    /// Writes the DIMACS dialect described in the module docs.
    pub fn write_dimacs(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for var in self.var_map.endo_vars() {
            let label = self.var_map.label(var).unwrap_or("");
            writeln!(out, "c endo {var} {label}").unwrap();
        }
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len()).unwrap();
        for clause in &self.clauses {
            for lit in clause {
                write!(out, "{lit} ").unwrap();
            }
            writeln!(out, "0").unwrap();
        }
        out
    }

    /// Parses the DIMACS dialect described in the module docs.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut var_map = VarMap::default();
        let mut header: Option<(u32, usize)> = None;
        let mut clauses: Vec<Clause> = Vec::new();
        let mut current: Clause = Vec::new();

        for (line_no, raw) in text.lines().enumerate() {
            let line_no = line_no + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('c') {
                let rest = rest.trim_start();
                if let Some(decl) = rest.strip_prefix("endo ") {
                    let decl = decl.trim_start();
                    let (var_tok, label) = match decl.split_once(char::is_whitespace) {
                        Some((v, l)) => (v, l.trim()),
                        None => (decl, ""),
                    };
                    let var: u32 = var_tok.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid endogenous variable `{var_tok}`"),
                    })?;
                    if var == 0 {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "variable 0 is reserved".into(),
                        });
                    }
                    var_map.declare(VarId(var), label);
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                if header.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "duplicate header".into(),
                    });
                }
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let parsed = match toks.as_slice() {
                    ["cnf", v, c] => v.parse::<u32>().ok().zip(c.parse::<usize>().ok()),
                    _ => None,
                };
                header = Some(parsed.ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("invalid header `{line}`"),
                })?);
                continue;
            }
            if header.is_none() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "clause before `p cnf` header".into(),
                });
            }
            for tok in line.split_whitespace() {
                let value: i64 = tok.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid literal `{tok}`"),
                })?;
                if value == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(Lit::from_dimacs(value)?);
                }
            }
        }
        let Some((num_vars, num_clauses)) = header else {
            return Err(Error::Parse {
                line: 0,
                message: "missing `p cnf` header".into(),
            });
        };
        if !current.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "unterminated clause at end of input".into(),
            });
        }
        if clauses.len() != num_clauses {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "header declares {num_clauses} clauses but {} were given",
                    clauses.len()
                ),
            });
        }
        CnfFormula::new(num_vars, clauses, var_map)
    }
}

/// Tseytin encoding of a circuit over endogenous facts.
///
/// Every endogenous fact of the circuit's database gets a variable (id equal
/// to the fact id) whether or not it appears in the circuit; auxiliary gate
/// variables are numbered after the largest endogenous fact id in gate
/// order. Fails if a reachable variable gate mentions an exogenous fact.
pub fn tseytin(circuit: &BooleanCircuit) -> Result<CnfFormula> {
    let db = circuit.database();
    let gates = circuit.gates();

    let mut reachable = vec![false; gates.len()];
    let mut stack = vec![circuit.output()];
    while let Some(g) = stack.pop() {
        if std::mem::replace(&mut reachable[g.0], true) {
            continue;
        }
        match &gates[g.0] {
            Gate::Var(_) | Gate::True | Gate::False => {}
            Gate::Not(c) => stack.push(*c),
            Gate::And(cs) | Gate::Or(cs) => stack.extend(cs.iter().copied()),
        }
    }

    let var_map = VarMap::for_database(db);
    let mut next_aux = var_map
        .endo_vars()
        .last()
        .map(|v| v.0 + 1)
        .unwrap_or(1);

    let mut gate_var: Vec<Option<VarId>> = vec![None; gates.len()];
    for (i, gate) in gates.iter().enumerate() {
        if !reachable[i] {
            continue;
        }
        let var = match gate {
            Gate::Var(f) => {
                if !db.is_endogenous(*f) {
                    return Err(Error::ExogenousInEncoding(*f));
                }
                VarId(f.0)
            }
            _ => {
                let v = VarId(next_aux);
                next_aux += 1;
                v
            }
        };
        gate_var[i] = Some(var);
    }

    let output_var = gate_var[circuit.output().0].expect("output is reachable");
    let mut clauses: Vec<Clause> = vec![vec![Lit::pos(output_var)]];
    for (i, gate) in gates.iter().enumerate() {
        if !reachable[i] {
            continue;
        }
        let z = gate_var[i].unwrap();
        let child = |c: &crate::circuit::GateId| gate_var[c.0].unwrap();
        match gate {
            Gate::Var(_) => {}
            Gate::Not(c) => {
                let c = child(c);
                clauses.push(vec![Lit::pos(z), Lit::pos(c)]);
                clauses.push(vec![Lit::neg(z), Lit::neg(c)]);
            }
            Gate::And(cs) => {
                let mut long = vec![Lit::pos(z)];
                for c in cs {
                    let c = child(c);
                    clauses.push(vec![Lit::neg(z), Lit::pos(c)]);
                    long.push(Lit::neg(c));
                }
                clauses.push(long);
            }
            Gate::Or(cs) => {
                let mut long = vec![Lit::neg(z)];
                for c in cs {
                    let c = child(c);
                    clauses.push(vec![Lit::pos(z), Lit::neg(c)]);
                    long.push(Lit::pos(c));
                }
                clauses.push(long);
            }
            Gate::True => clauses.push(vec![Lit::pos(z)]),
            Gate::False => clauses.push(vec![Lit::neg(z)]),
        }
    }

    let num_vars = next_aux
        .saturating_sub(1)
        .max(var_map.endo_vars().last().map(|v| v.0).unwrap_or(0))
        .max(1);
    CnfFormula::new(num_vars, clauses, var_map)
}

/// Verifies the strong equisatisfiability contract between a circuit and its
/// encoding by enumerating all assignments: every circuit variable must
/// appear in the formula, every satisfying circuit assignment must have
/// exactly one extension to the auxiliary variables satisfying the formula,
/// and every other assignment must have none.
///
/// Guarded by [`MAX_EQUISAT_CHECK_VARS`] total variables.
pub fn check_equisatisfiable(circuit: &BooleanCircuit, cnf: &CnfFormula) -> Result<bool> {
    let vars_table = circuit.compute_vars();
    let circuit_vars: Vec<FactId> = vars_table.get(circuit.output()).iter().copied().collect();
    let aux: Vec<VarId> = cnf.aux_vars();
    let total = circuit_vars.len() + aux.len();
    if total > MAX_EQUISAT_CHECK_VARS {
        return Err(Error::TooManyVarsForEquisatCheck {
            n: total,
            max: MAX_EQUISAT_CHECK_VARS,
        });
    }

    let mentioned: BTreeSet<VarId> = cnf.mentioned_vars().into_iter().collect();
    for f in &circuit_vars {
        if !mentioned.contains(&VarId(f.0)) {
            return Ok(false);
        }
    }
    for v in &mentioned {
        let is_circuit_var = circuit_vars.iter().any(|f| f.0 == v.0);
        if !is_circuit_var && !aux.contains(v) {
            return Ok(false);
        }
    }

    // Bit positions: circuit variables first, then auxiliary variables.
    let mut position: BTreeMap<VarId, usize> = BTreeMap::new();
    for (i, f) in circuit_vars.iter().enumerate() {
        position.insert(VarId(f.0), i);
    }
    for (i, v) in aux.iter().enumerate() {
        position.insert(*v, circuit_vars.len() + i);
    }
    let clause_masks: Vec<(u32, u32)> = cnf
        .clauses()
        .iter()
        .map(|clause| {
            let mut pos = 0u32;
            let mut neg = 0u32;
            for lit in clause {
                let bit = 1u32 << position[&lit.var];
                if lit.positive {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            (pos, neg)
        })
        .collect();

    let a = circuit_vars.len();
    let b = aux.len();
    for fact_mask in 0u32..(1u32 << a) {
        let assignment: Assignment = circuit_vars
            .iter()
            .enumerate()
            .filter(|(i, _)| fact_mask & (1 << i) != 0)
            .map(|(_, &f)| f)
            .collect();
        let expected: u64 = circuit.evaluate(&assignment) as u64;
        let mut extensions = 0u64;
        for aux_mask in 0u32..(1u32 << b) {
            let combined = fact_mask | (aux_mask << a);
            let sat = clause_masks
                .iter()
                .all(|&(pos, neg)| pos & combined != 0 || neg & !combined != 0);
            if sat {
                extensions += 1;
                if extensions > expected {
                    return Ok(false);
                }
            }
        }
        if extensions != expected {
            return Ok(false);
        }
    }
    Ok(true)
}
