//! Boolean circuits over database facts.
//!
//! A [`BooleanCircuit`] is a topologically ordered array of gates: variables
//! (one per referenced fact), negations, n-ary conjunctions/disjunctions and
//! constants. The gate listed as `output` computes the circuit's function.
//!
//! Two structural properties drive the exact algorithms downstream:
//!
//! * an And gate is *decomposable* when its children mention pairwise
//!   disjoint variable sets,
//! * an Or gate is *deterministic* when no assignment satisfies two of its
//!   children simultaneously.
//!
//! Determinism of a gate can be verified exhaustively for up to
//! [`MAX_EXHAUSTIVE_CHECK_VARS`] variables, or taken on trust when a
//! construction guarantees it; the choice is recorded by the caller.
//!
//! # JSON format
//!
//! ```json
//! {
//!   "facts": [{"id": 1, "kind": "endo", "label": "Flights(JFK,CDG)"}],
//!   "gates": [
//!     {"id": 0, "kind": "var", "fact": 1},
//!     {"id": 1, "kind": "not", "inputs": [0]},
//!     {"id": 2, "kind": "or", "inputs": [0, 1]}
//!   ],
//!   "output": 2
//! }
//! ```
//!
//! Gate ids are arbitrary unique integers, but a gate's inputs must be listed
//! before the gate itself.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lineage::{Assignment, Database, DnfLineage, Fact, FactId};
use crate::{Error, Result};

/// Largest variable-set size for which exhaustive determinism checking is
/// allowed.
pub const MAX_EXHAUSTIVE_CHECK_VARS: usize = 20;

/// Index of a gate within a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GateId(pub usize);

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// A single gate. Inputs always point at earlier gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    Var(FactId),
    Not(GateId),
    And(Vec<GateId>),
    Or(Vec<GateId>),
    True,
    False,
}

/// How to establish that every Or gate is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterminismMode {
    /// Enumerate assignments over each Or gate's variables.
    Exhaustive,
    /// Accept the property because the circuit's construction guarantees it.
    Trusted,
}

/// Outcome of a determinism check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterminismStatus {
    /// Every Or gate verified deterministic.
    Deterministic,
    /// Some assignment satisfies two children of this Or gate.
    NotDeterministic(GateId),
    /// Taken on trust, not verified.
    Trusted,
}

/// Per-gate variable sets, in gate order.
#[derive(Debug, Clone)]
pub struct VarsTable {
    vars: Vec<BTreeSet<FactId>>,
}

impl VarsTable {
    pub fn get(&self, gate: GateId) -> &BTreeSet<FactId> {
        &self.vars[gate.0]
    }
}

/// A Boolean circuit over the facts of a database.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanCircuit {
    database: Database,
    gates: Vec<Gate>,
    output: GateId,
}

impl BooleanCircuit {
    /// Validates gate references (topological order, arity, known facts).
    pub fn new(database: Database, gates: Vec<Gate>, output: GateId) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::InvalidCircuit("circuit has no gates".into()));
        }
        if output.0 >= gates.len() {
            return Err(Error::InvalidCircuit(format!(
                "output gate {output} does not exist"
            )));
        }
        for (i, gate) in gates.iter().enumerate() {
            let check_input = |g: GateId| -> Result<()> {
                if g.0 >= i {
                    return Err(Error::InvalidCircuit(format!(
                        "gate g{i} uses input {g} which is not an earlier gate"
                    )));
                }
                Ok(())
            };
            match gate {
                Gate::Var(f) => {
                    if !database.contains(*f) {
                        return Err(Error::UnknownFact(*f));
                    }
                }
                Gate::Not(c) => check_input(*c)?,
                Gate::And(cs) | Gate::Or(cs) => {
                    for &c in cs {
                        check_input(c)?;
                    }
                }
                Gate::True | Gate::False => {}
            }
        }
        Ok(BooleanCircuit {
            database,
            gates,
            output,
        })
    }

    pub fn database(&self) -> &Database {
        &self.database
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.0]
    }

    pub fn output(&self) -> GateId {
        self.output
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Builds the canonical circuit of a DNF:
    ///
    /// * no monomials: a single False gate;
    /// * one monomial: a True gate if empty, the bare variable if a single
    ///   fact, otherwise one And over the variables;
    /// * otherwise: an Or whose children are one And gate per monomial (also
    ///   for empty and single-fact monomials).
    pub fn from_dnf(lineage: &DnfLineage) -> Self {
        let database = lineage.database().clone();
        let monomials = lineage.monomials();
        let mut gates = Vec::new();

        if monomials.is_empty() {
            gates.push(Gate::False);
            let output = GateId(0);
            return BooleanCircuit {
                database,
                gates,
                output,
            };
        }

        let fact_ids: BTreeSet<FactId> = monomials.iter().flatten().copied().collect();
        let mut var_gate = BTreeMap::new();
        for &f in &fact_ids {
            var_gate.insert(f, GateId(gates.len()));
            gates.push(Gate::Var(f));
        }

        if monomials.len() == 1 {
            let m = &monomials[0];
            let output = match m.len() {
                0 => {
                    gates.push(Gate::True);
                    GateId(gates.len() - 1)
                }
                1 => var_gate[m.iter().next().unwrap()],
                _ => {
                    let inputs = m.iter().map(|f| var_gate[f]).collect();
                    gates.push(Gate::And(inputs));
                    GateId(gates.len() - 1)
                }
            };
            return BooleanCircuit {
                database,
                gates,
                output,
            };
        }

        let mut monomial_gates = Vec::with_capacity(monomials.len());
        for m in monomials {
            let inputs = m.iter().map(|f| var_gate[f]).collect();
            gates.push(Gate::And(inputs));
            monomial_gates.push(GateId(gates.len() - 1));
        }
        gates.push(Gate::Or(monomial_gates));
        let output = GateId(gates.len() - 1);
        BooleanCircuit {
            database,
            gates,
            output,
        }
    }

    /// Variable set of every gate, bottom-up.
    pub fn compute_vars(&self) -> VarsTable {
        let mut vars: Vec<BTreeSet<FactId>> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let set = match gate {
                Gate::Var(f) => BTreeSet::from([*f]),
                Gate::Not(c) => vars[c.0].clone(),
                Gate::And(cs) | Gate::Or(cs) => {
                    let mut s = BTreeSet::new();
                    for c in cs {
                        s.extend(vars[c.0].iter().copied());
                    }
                    s
                }
                Gate::True | Gate::False => BTreeSet::new(),
            };
            vars.push(set);
        }
        VarsTable { vars }
    }

    /// Evaluates the circuit on an assignment. A variable gate is true iff
    /// its fact is in the assignment; callers either fix exogenous facts
    /// first or include them in the assignment.
    pub fn evaluate(&self, assignment: &Assignment) -> bool {
        let mut values: Vec<bool> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let v = match gate {
                Gate::Var(f) => assignment.contains(f),
                Gate::Not(c) => !values[c.0],
                Gate::And(cs) => cs.iter().all(|c| values[c.0]),
                Gate::Or(cs) => cs.iter().any(|c| values[c.0]),
                Gate::True => true,
                Gate::False => false,
            };
            values.push(v);
        }
        values[self.output.0]
    }

    /// First And gate whose children share a variable, if any.
    pub fn find_nondecomposable(&self) -> Option<GateId> {
        let vars = self.compute_vars();
        for (i, gate) in self.gates.iter().enumerate() {
            if let Gate::And(cs) = gate {
                let mut seen: BTreeSet<FactId> = BTreeSet::new();
                for c in cs {
                    for f in vars.get(*c) {
                        if !seen.insert(*f) {
                            return Some(GateId(i));
                        }
                    }
                }
            }
        }
        None
    }

    /// True iff every And gate is decomposable.
    pub fn check_decomposable(&self) -> bool {
        self.find_nondecomposable().is_none()
    }

    /// Establishes determinism of every Or gate, either exhaustively (guarded
    /// by [`MAX_EXHAUSTIVE_CHECK_VARS`] per gate) or on trust.
    pub fn check_deterministic(&self, mode: DeterminismMode) -> Result<DeterminismStatus> {
        match mode {
            DeterminismMode::Trusted => Ok(DeterminismStatus::Trusted),
            DeterminismMode::Exhaustive => {
                let vars = self.compute_vars();
                for (i, gate) in self.gates.iter().enumerate() {
                    let Gate::Or(cs) = gate else { continue };
                    if cs.len() < 2 {
                        continue;
                    }
                    let gate_vars: Vec<FactId> = vars.get(GateId(i)).iter().copied().collect();
                    if gate_vars.len() > MAX_EXHAUSTIVE_CHECK_VARS {
                        return Err(Error::TooManyVarsForExhaustiveCheck {
                            n: gate_vars.len(),
                            max: MAX_EXHAUSTIVE_CHECK_VARS,
                        });
                    }
                    for mask in 0..(1u64 << gate_vars.len()) {
                        let assignment: Assignment = gate_vars
                            .iter()
                            .enumerate()
                            .filter(|(b, _)| mask & (1 << b) != 0)
                            .map(|(_, &f)| f)
                            .collect();
                        let values = self.eval_all(&assignment);
                        if cs.iter().filter(|c| values[c.0]).count() >= 2 {
                            return Ok(DeterminismStatus::NotDeterministic(GateId(i)));
                        }
                    }
                }
                Ok(DeterminismStatus::Deterministic)
            }
        }
    }

    fn eval_all(&self, assignment: &Assignment) -> Vec<bool> {
        let mut values: Vec<bool> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let v = match gate {
                Gate::Var(f) => assignment.contains(f),
                Gate::Not(c) => !values[c.0],
                Gate::And(cs) => cs.iter().all(|c| values[c.0]),
                Gate::Or(cs) => cs.iter().any(|c| values[c.0]),
                Gate::True => true,
                Gate::False => false,
            };
            values.push(v);
        }
        values
    }

    /// Rewrites the circuit so every And/Or gate has fan-in exactly 0 or 2:
    /// gates with one child get a neutral constant sibling (True for And,
    /// False for Or), wider gates are folded into left-associated binary
    /// chains. Preserves the function, decomposability and determinism.
    pub fn normalize_fanin2(&self) -> BooleanCircuit {
        let mut gates: Vec<Gate> = Vec::with_capacity(self.gates.len());
        let mut map: Vec<GateId> = Vec::with_capacity(self.gates.len());
        let mut true_gate: Option<GateId> = None;
        let mut false_gate: Option<GateId> = None;

        for gate in &self.gates {
            let new_id = match gate {
                Gate::Var(f) => push(&mut gates, Gate::Var(*f)),
                Gate::Not(c) => push(&mut gates, Gate::Not(map[c.0])),
                Gate::True => push(&mut gates, Gate::True),
                Gate::False => push(&mut gates, Gate::False),
                Gate::And(cs) | Gate::Or(cs) => {
                    let is_and = matches!(gate, Gate::And(_));
                    let children: Vec<GateId> = cs.iter().map(|c| map[c.0]).collect();
                    match children.len() {
                        0 => {
                            let mk = if is_and { Gate::And(vec![]) } else { Gate::Or(vec![]) };
                            push(&mut gates, mk)
                        }
                        1 => {
                            let unit = if is_and {
                                *true_gate
                                    .get_or_insert_with(|| push(&mut gates, Gate::True))
                            } else {
                                *false_gate
                                    .get_or_insert_with(|| push(&mut gates, Gate::False))
                            };
                            let mk = if is_and {
                                Gate::And(vec![children[0], unit])
                            } else {
                                Gate::Or(vec![children[0], unit])
                            };
                            push(&mut gates, mk)
                        }
                        _ => {
                            let mut acc = children[0];
                            for &c in &children[1..] {
                                let mk = if is_and {
                                    Gate::And(vec![acc, c])
                                } else {
                                    Gate::Or(vec![acc, c])
                                };
                                acc = push(&mut gates, mk);
                            }
                            acc
                        }
                    }
                }
            };
            map.push(new_id);
        }

        BooleanCircuit {
            database: self.database.clone(),
            gates,
            output: map[self.output.0],
        }
    }

    /// Replaces every variable gate of `fact` with a constant.
    pub fn substitute(&self, fact: FactId, value: bool) -> BooleanCircuit {
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Var(f) if *f == fact => {
                    if value {
                        Gate::True
                    } else {
                        Gate::False
                    }
                }
                other => other.clone(),
            })
            .collect();
        BooleanCircuit {
            database: self.database.clone(),
            gates,
            output: self.output,
        }
    }

    /// Replaces every variable gate of an exogenous fact with True.
    pub fn fix_exogenous(&self) -> BooleanCircuit {
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Var(f) if !self.database.is_endogenous(*f) => Gate::True,
                other => other.clone(),
            })
            .collect();
        BooleanCircuit {
            database: self.database.clone(),
            gates,
            output: self.output,
        }
    }

    /// Conjoins `(f or not f)` for every fact of `universe` missing from the
    /// output's variable set, so the result mentions all of `universe`
    /// without changing the function. Facts must be endogenous.
    pub fn complete_vars(&self, universe: &[FactId]) -> Result<BooleanCircuit> {
        for &f in universe {
            if !self.database.contains(f) {
                return Err(Error::UnknownFact(f));
            }
            if !self.database.is_endogenous(f) {
                return Err(Error::NotEndogenous(f));
            }
        }
        let present = self.compute_vars();
        let present = present.get(self.output);
        let missing: Vec<FactId> = universe
            .iter()
            .copied()
            .filter(|f| !present.contains(f))
            .collect();
        if missing.is_empty() {
            return Ok(self.clone());
        }
        let mut gates = self.gates.clone();
        let mut conjuncts = vec![self.output];
        for f in missing {
            let var = push(&mut gates, Gate::Var(f));
            let not = push(&mut gates, Gate::Not(var));
            conjuncts.push(push(&mut gates, Gate::Or(vec![var, not])));
        }
        let output = push(&mut gates, Gate::And(conjuncts));
        Ok(BooleanCircuit {
            database: self.database.clone(),
            gates,
            output,
        })
    }

    /// Serializes to the JSON format described in the module docs.
    pub fn to_json(&self) -> String {
        let gates = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let (kind, inputs, fact) = match g {
                    Gate::Var(f) => ("var", vec![], Some(f.0)),
                    Gate::Not(c) => ("not", vec![c.0], None),
                    Gate::And(cs) => ("and", cs.iter().map(|c| c.0).collect(), None),
                    Gate::Or(cs) => ("or", cs.iter().map(|c| c.0).collect(), None),
                    Gate::True => ("true", vec![], None),
                    Gate::False => ("false", vec![], None),
                };
                GateJson {
                    id: i,
                    kind: kind.to_string(),
                    inputs,
                    fact,
                }
            })
            .collect();
        let doc = CircuitJson {
            facts: self.database.clone().into(),
            gates,
            output: self.output.0,
        };
        serde_json::to_string_pretty(&doc).expect("circuit serialization cannot fail")
    }

    /// Parses the JSON format. Gates may use arbitrary unique ids but must be
    /// listed inputs-first.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CircuitJson = serde_json::from_str(text)?;
        let database = Database::new(doc.facts)?;
        let mut index: BTreeMap<usize, GateId> = BTreeMap::new();
        let mut gates = Vec::with_capacity(doc.gates.len());
        for g in &doc.gates {
            let resolve = |inputs: &[usize]| -> Result<Vec<GateId>> {
                inputs
                    .iter()
                    .map(|i| {
                        index.get(i).copied().ok_or_else(|| {
                            Error::InvalidCircuit(format!(
                                "gate {} uses input {} which is not an earlier gate",
                                g.id, i
                            ))
                        })
                    })
                    .collect()
            };
            let arity = |want: usize| -> Result<()> {
                if g.inputs.len() != want {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {} of kind {} needs {} input(s), got {}",
                        g.id,
                        g.kind,
                        want,
                        g.inputs.len()
                    )));
                }
                Ok(())
            };
            let gate = match g.kind.as_str() {
                "var" => {
                    arity(0)?;
                    let fact = g.fact.ok_or_else(|| {
                        Error::InvalidCircuit(format!("var gate {} needs a fact", g.id))
                    })?;
                    Gate::Var(FactId(fact))
                }
                "not" => {
                    arity(1)?;
                    Gate::Not(resolve(&g.inputs)?[0])
                }
                "and" => Gate::And(resolve(&g.inputs)?),
                "or" => Gate::Or(resolve(&g.inputs)?),
                "true" => {
                    arity(0)?;
                    Gate::True
                }
                "false" => {
                    arity(0)?;
                    Gate::False
                }
                other => {
                    return Err(Error::InvalidCircuit(format!(
                        "unknown gate kind `{other}`"
                    )))
                }
            };
            if index.insert(g.id, GateId(gates.len())).is_some() {
                return Err(Error::InvalidCircuit(format!("duplicate gate id {}", g.id)));
            }
            gates.push(gate);
        }
        let output = *index.get(&doc.output).ok_or_else(|| {
            Error::InvalidCircuit(format!("output gate {} does not exist", doc.output))
        })?;
        BooleanCircuit::new(database, gates, output)
    }
}

fn push(gates: &mut Vec<Gate>, gate: Gate) -> GateId {
    gates.push(gate);
    GateId(gates.len() - 1)
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    facts: Vec<Fact>,
    gates: Vec<GateJson>,
    output: usize,
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    id: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    inputs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fact: Option<u32>,
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::testutil::{
        deterministic_flight_circuit, endo_flight_lineage, endo_no_direct_lineage,
        flight_database, flight_lineage,
    };

    fn all_assignments(facts: &[FactId]) -> impl Iterator<Item = Assignment> + '_ {
        (0..(1u64 << facts.len())).map(move |mask| {
            facts
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &f)| f)
                .collect()
        })
    }

    #[test]
    fn dnf_circuit_matches_lineage_semantics() {
        let lineage = endo_flight_lineage();
        let circuit = BooleanCircuit::from_dnf(&lineage);
        let endo = lineage.database().endogenous_ids();
        for assignment in all_assignments(&endo) {
            assert_eq!(
                circuit.evaluate(&assignment),
                lineage.evaluate(&assignment),
                "assignment {assignment:?}"
            );
        }
    }

    #[test]
    fn dnf_circuit_shapes() {
        let db = flight_database();
        let single = DnfLineage::new(db.clone(), [BTreeSet::from([FactId(1)])]).unwrap();
        let c = BooleanCircuit::from_dnf(&single);
        assert_eq!(c.gates(), &[Gate::Var(FactId(1))]);

        let empty = DnfLineage::new(db.clone(), []).unwrap();
        let c = BooleanCircuit::from_dnf(&empty);
        assert_eq!(c.gates(), &[Gate::False]);

        let tautology = DnfLineage::new(db.clone(), [BTreeSet::new()]).unwrap();
        let c = BooleanCircuit::from_dnf(&tautology);
        assert_eq!(c.gates(), &[Gate::True]);

        // Five monomials over six facts: vars, five Ands, one Or.
        let c = BooleanCircuit::from_dnf(&endo_no_direct_lineage());
        assert_eq!(c.len(), 6 + 5 + 1);
        assert!(matches!(c.gate(c.output()), Gate::Or(cs) if cs.len() == 5));

        // A singleton monomial among several still gets its own And wrapper.
        let c = BooleanCircuit::from_dnf(&endo_flight_lineage());
        assert_eq!(c.len(), 7 + 6 + 1);
        let Gate::Or(children) = c.gate(c.output()) else {
            panic!("expected Or output");
        };
        assert!(children
            .iter()
            .all(|g| matches!(c.gate(*g), Gate::And(_))));
    }

    #[test]
    fn vars_table_follows_structure() {
        let c = BooleanCircuit::from_dnf(&endo_flight_lineage());
        let vars = c.compute_vars();
        let root: Vec<u32> = vars.get(c.output()).iter().map(|f| f.0).collect();
        assert_eq!(root, vec![1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn dnf_or_gate_is_not_deterministic() {
        let c = BooleanCircuit::from_dnf(&endo_flight_lineage());
        assert!(c.check_decomposable());
        let status = c.check_deterministic(DeterminismMode::Exhaustive).unwrap();
        assert!(matches!(status, DeterminismStatus::NotDeterministic(_)));
        assert_eq!(
            c.check_deterministic(DeterminismMode::Trusted).unwrap(),
            DeterminismStatus::Trusted
        );
    }

    #[test]
    fn handcrafted_circuit_is_deterministic_and_decomposable() {
        let c = deterministic_flight_circuit();
        assert!(c.check_decomposable());
        assert_eq!(
            c.check_deterministic(DeterminismMode::Exhaustive).unwrap(),
            DeterminismStatus::Deterministic
        );
        let lineage = endo_flight_lineage();
        let endo = lineage.database().endogenous_ids();
        for assignment in all_assignments(&endo) {
            assert_eq!(c.evaluate(&assignment), lineage.evaluate(&assignment));
        }
    }

    #[test]
    fn shared_variable_breaks_decomposability() {
        let db = flight_database();
        let gates = vec![
            Gate::Var(FactId(1)),
            Gate::Var(FactId(2)),
            Gate::And(vec![GateId(0), GateId(1)]),
            Gate::And(vec![GateId(0), GateId(2)]),
        ];
        let c = BooleanCircuit::new(db, gates, GateId(3)).unwrap();
        assert_eq!(c.find_nondecomposable(), Some(GateId(3)));
    }

    #[test]
    fn exhaustive_check_guard() {
        let db = Database::new((1..=21).map(|i| Fact::endo(i, format!("f{i}")))).unwrap();
        let mut gates: Vec<Gate> = (1..=21).map(|i| Gate::Var(FactId(i))).collect();
        gates.push(Gate::Or((0..21).map(GateId).collect()));
        let c = BooleanCircuit::new(db, gates, GateId(21)).unwrap();
        assert!(matches!(
            c.check_deterministic(DeterminismMode::Exhaustive),
            Err(Error::TooManyVarsForExhaustiveCheck { n: 21, max: 20 })
        ));
    }

    #[test]
    fn normalize_fanin2_bounds_fan_in_and_preserves_function() {
        for lineage in [endo_flight_lineage(), endo_no_direct_lineage()] {
            let c = BooleanCircuit::from_dnf(&lineage);
            let n = c.normalize_fanin2();
            for gate in n.gates() {
                if let Gate::And(cs) | Gate::Or(cs) = gate {
                    assert!(cs.len() == 2 || cs.is_empty(), "bad fan-in {}", cs.len());
                }
            }
            let endo = lineage.database().endogenous_ids();
            for assignment in all_assignments(&endo) {
                assert_eq!(c.evaluate(&assignment), n.evaluate(&assignment));
            }
        }
    }

    #[test]
    fn normalize_fanin2_keeps_determinism_and_decomposability() {
        let c = deterministic_flight_circuit().normalize_fanin2();
        assert!(c.check_decomposable());
        assert_eq!(
            c.check_deterministic(DeterminismMode::Exhaustive).unwrap(),
            DeterminismStatus::Deterministic
        );
    }

    #[test]
    fn normalize_fanin2_pads_unary_gates_with_neutral_constants() {
        let db = flight_database();
        let gates = vec![
            Gate::Var(FactId(1)),
            Gate::And(vec![GateId(0)]),
            Gate::Or(vec![GateId(1)]),
        ];
        let c = BooleanCircuit::new(db, gates, GateId(2)).unwrap();
        let n = c.normalize_fanin2();
        let and_padded = n.gates().iter().any(|g| {
            matches!(g, Gate::And(cs) if cs.len() == 2 && matches!(n.gate(cs[1]), Gate::True))
        });
        let or_padded = n.gates().iter().any(|g| {
            matches!(g, Gate::Or(cs) if cs.len() == 2 && matches!(n.gate(cs[1]), Gate::False))
        });
        assert!(and_padded && or_padded);
        for assignment in all_assignments(&[FactId(1)]) {
            assert_eq!(c.evaluate(&assignment), n.evaluate(&assignment));
        }
    }

    #[test]
    fn substitute_pins_a_fact() {
        let lineage = endo_flight_lineage();
        let c = BooleanCircuit::from_dnf(&lineage);
        let pinned = c.substitute(FactId(1), true);
        let endo = lineage.database().endogenous_ids();
        for assignment in all_assignments(&endo) {
            let mut with = assignment.clone();
            with.insert(FactId(1));
            assert_eq!(pinned.evaluate(&assignment), c.evaluate(&with));
        }
        let vars = pinned.compute_vars();
        assert!(!vars.get(pinned.output()).contains(&FactId(1)));
    }

    #[test]
    fn fix_exogenous_agrees_with_dnf_fixing() {
        let lineage = flight_lineage();
        let c = BooleanCircuit::from_dnf(&lineage).fix_exogenous();
        let fixed = lineage.fix_exogenous();
        let endo = lineage.database().endogenous_ids();
        for assignment in all_assignments(&endo) {
            assert_eq!(c.evaluate(&assignment), fixed.evaluate(&assignment));
        }
    }

    #[test]
    fn complete_vars_adds_tautology_conjuncts() {
        let db = Database::new([Fact::endo(1, "f")]).unwrap();
        let c = BooleanCircuit::new(db, vec![Gate::True], GateId(0)).unwrap();
        let completed = c.complete_vars(&[FactId(1)]).unwrap();
        let vars = completed.compute_vars();
        assert_eq!(
            vars.get(completed.output()).iter().copied().collect::<Vec<_>>(),
            vec![FactId(1)]
        );
        let Gate::And(cs) = completed.gate(completed.output()) else {
            panic!("expected And output");
        };
        assert_eq!(cs.len(), 2);
        assert!(matches!(completed.gate(cs[0]), Gate::True));
        assert!(matches!(completed.gate(cs[1]), Gate::Or(_)));
        for assignment in all_assignments(&[FactId(1)]) {
            assert!(completed.evaluate(&assignment));
        }
    }

    #[test]
    fn complete_vars_is_identity_when_nothing_is_missing() {
        let c = BooleanCircuit::from_dnf(&endo_flight_lineage());
        let endo: Vec<FactId> = (1..=7).map(FactId).collect();
        assert_eq!(c.complete_vars(&endo).unwrap(), c);
        let full: Vec<FactId> = (1..=8).map(FactId).collect();
        let completed = c.complete_vars(&full).unwrap();
        assert!(completed
            .compute_vars()
            .get(completed.output())
            .contains(&FactId(8)));
    }

    #[test]
    fn complete_vars_rejects_exogenous_and_unknown_facts() {
        let c = BooleanCircuit::from_dnf(&endo_flight_lineage());
        assert!(matches!(
            c.complete_vars(&[FactId(9)]),
            Err(Error::NotEndogenous(FactId(9)))
        ));
        assert!(matches!(
            c.complete_vars(&[FactId(99)]),
            Err(Error::UnknownFact(FactId(99)))
        ));
    }

    #[test]
    fn json_round_trip() {
        for c in [
            BooleanCircuit::from_dnf(&endo_flight_lineage()),
            deterministic_flight_circuit(),
        ] {
            let text = c.to_json();
            let back = BooleanCircuit::from_json(&text).unwrap();
            assert_eq!(c, back);
        }
    }

    #[test]
    fn json_rejects_malformed_circuits() {
        let cases = [
            (
                r#"{"facts": [], "gates": [{"id": 0, "kind": "frob"}], "output": 0}"#,
                "unknown gate kind",
            ),
            (
                r#"{"facts": [], "gates": [{"id": 0, "kind": "var"}], "output": 0}"#,
                "needs a fact",
            ),
            (
                r#"{"facts": [], "gates": [{"id": 0, "kind": "not", "inputs": [1]}, {"id": 1, "kind": "true"}], "output": 0}"#,
                "not an earlier gate",
            ),
            (
                r#"{"facts": [], "gates": [{"id": 0, "kind": "true"}], "output": 3}"#,
                "does not exist",
            ),
            (
                r#"{"facts": [], "gates": [{"id": 0, "kind": "true"}, {"id": 0, "kind": "false"}], "output": 0}"#,
                "duplicate gate id",
            ),
            (
                r#"{"facts": [], "gates": [{"id": 0, "kind": "true"}, {"id": 1, "kind": "not", "inputs": [0, 0]}], "output": 1}"#,
                "needs 1 input",
            ),
        ];
        for (text, needle) in cases {
            let err = BooleanCircuit::from_json(text).unwrap_err().to_string();
            assert!(err.contains(needle), "expected `{needle}` in `{err}`");
        }
    }
}
