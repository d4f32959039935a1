//! Deterministic decomposable NNF circuits.
//!
//! A [`Ddnnf`] is a DAG of literal, And, Or and constant nodes in topological
//! order. Every And is *decomposable* (children over pairwise disjoint
//! variables; enforced at construction) and every Or is *deterministic* (no
//! assignment satisfies two children). Determinism cannot be validated
//! cheaply, so each circuit records where the property comes from: verified
//! by exhaustive check, or trusted because a construction guarantees it.
//!
//! The variable map distinguishes endogenous fact variables from auxiliary
//! variables introduced by the Tseytin encoding. [`Ddnnf::purge_tseytin`]
//! removes the auxiliary variables from a compiled circuit: it drops
//! unsatisfiable and unreachable nodes and replaces auxiliary literals with
//! True, yielding an equivalent d-DNNF over the fact variables only.
//!
//! # NNF file dialect
//!
//! The header is `nnf V E n` (node count, edge count, variable count); then
//! one node per line, ids assigned by position starting at 0:
//!
//! * `L l` — literal, `l` a DIMACS literal;
//! * `A c i1 … ic` — And with `c` children (`A 0` is True);
//! * `O j c i1 … ic` — Or with `c` children and optional decision variable
//!   `j` (0 if none; `O 0 0` is False).

use std::collections::BTreeSet;
use std::fmt;

use crate::circuit::{BooleanCircuit, DeterminismMode, DeterminismStatus, Gate, GateId};
use crate::cnf::{Lit, VarId, VarMap};
use crate::lineage::{FactId, SetFunction, MAX_GAME_FACTS};
use crate::{Error, Result};

pub use crate::circuit::MAX_EXHAUSTIVE_CHECK_VARS;

/// Index of a node within a d-DNNF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// A d-DNNF node. Children always point at earlier nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DdnnfNode {
    Lit(Lit),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    True,
    False,
}

/// Where the determinism of the Or nodes was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterminismProvenance {
    CheckedExhaustive,
    TrustedByConstruction,
}

/// Per-node variable sets.
#[derive(Debug, Clone)]
pub struct NodeVars {
    vars: Vec<BTreeSet<VarId>>,
}

impl NodeVars {
    pub fn get(&self, node: NodeId) -> &BTreeSet<VarId> {
        &self.vars[node.0]
    }
}

/// A deterministic decomposable NNF circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ddnnf {
    nodes: Vec<DdnnfNode>,
    root: NodeId,
    num_vars: u32,
    var_map: VarMap,
    determinism: DeterminismProvenance,
}

impl Ddnnf {
    /// Validates node references, variable ranges and decomposability of
    /// every And node. Determinism is recorded as given.
    pub fn new(
        nodes: Vec<DdnnfNode>,
        root: NodeId,
        num_vars: u32,
        var_map: VarMap,
        determinism: DeterminismProvenance,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidCircuit("circuit has no nodes".into()));
        }
        if root.0 >= nodes.len() {
            return Err(Error::InvalidCircuit(format!(
                "root {root} does not exist"
            )));
        }
        let mut vars: Vec<BTreeSet<VarId>> = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            let set = match node {
                DdnnfNode::Lit(lit) => {
                    if lit.var.0 == 0 || lit.var.0 > num_vars {
                        return Err(Error::InvalidCircuit(format!(
                            "literal variable {} out of range 1..={num_vars}",
                            lit.var
                        )));
                    }
                    BTreeSet::from([lit.var])
                }
                DdnnfNode::True | DdnnfNode::False => BTreeSet::new(),
                DdnnfNode::And(cs) | DdnnfNode::Or(cs) => {
                    let mut union = BTreeSet::new();
                    let mut child_sizes = 0usize;
                    for &c in cs {
                        if c.0 >= i {
                            return Err(Error::InvalidCircuit(format!(
                                "node n{i} uses child {c} which is not an earlier node"
                            )));
                        }
                        union.extend(vars[c.0].iter().copied());
                        child_sizes += vars[c.0].len();
                    }
                    if matches!(node, DdnnfNode::And(_)) && union.len() != child_sizes {
                        return Err(Error::NotDecomposable(GateId(i)));
                    }
                    union
                }
            };
            vars.push(set);
        }
        Ok(Ddnnf {
            nodes,
            root,
            num_vars,
            var_map,
            determinism,
        })
    }

    pub fn nodes(&self) -> &[DdnnfNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &DdnnfNode {
        &self.nodes[id.0]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn var_map(&self) -> &VarMap {
        &self.var_map
    }

    pub fn determinism(&self) -> DeterminismProvenance {
        self.determinism
    }

    pub fn edge_count(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                DdnnfNode::And(cs) | DdnnfNode::Or(cs) => cs.len(),
                _ => 0,
            })
            .sum()
    }

    /// Variable set of every node, bottom-up.
    pub fn compute_vars(&self) -> NodeVars {
        let mut vars: Vec<BTreeSet<VarId>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let set = match node {
                DdnnfNode::Lit(lit) => BTreeSet::from([lit.var]),
                DdnnfNode::True | DdnnfNode::False => BTreeSet::new(),
                DdnnfNode::And(cs) | DdnnfNode::Or(cs) => {
                    let mut union = BTreeSet::new();
                    for &c in cs {
                        union.extend(vars[c.0].iter().copied());
                    }
                    union
                }
            };
            vars.push(set);
        }
        NodeVars { vars }
    }

    /// Evaluates the circuit with the given set of true variables.
    pub fn evaluate(&self, true_vars: &BTreeSet<VarId>) -> bool {
        let mut values: Vec<bool> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                DdnnfNode::Lit(lit) => lit.positive == true_vars.contains(&lit.var),
                DdnnfNode::And(cs) => cs.iter().all(|c| values[c.0]),
                DdnnfNode::Or(cs) => cs.iter().any(|c| values[c.0]),
                DdnnfNode::True => true,
                DdnnfNode::False => false,
            };
            values.push(v);
        }
        values[self.root.0]
    }

    /// True iff every And node is decomposable (already enforced by the
    /// constructor; provided for symmetry with circuits).
    pub fn check_decomposable(&self) -> bool {
        let vars = self.compute_vars();
        self.nodes.iter().enumerate().all(|(i, node)| match node {
            DdnnfNode::And(cs) => {
                let union = vars.get(NodeId(i)).len();
                let sum: usize = cs.iter().map(|c| vars.get(*c).len()).sum();
                union == sum
            }
            _ => true,
        })
    }

    /// Establishes determinism of every Or node, either exhaustively (guarded
    /// by [`MAX_EXHAUSTIVE_CHECK_VARS`] per node) or on trust.
    pub fn check_deterministic(&self, mode: DeterminismMode) -> Result<DeterminismStatus> {
        match mode {
            DeterminismMode::Trusted => Ok(DeterminismStatus::Trusted),
            DeterminismMode::Exhaustive => {
                let vars = self.compute_vars();
                for (i, node) in self.nodes.iter().enumerate() {
                    let DdnnfNode::Or(cs) = node else { continue };
                    if cs.len() < 2 {
                        continue;
                    }
                    let node_vars: Vec<VarId> = vars.get(NodeId(i)).iter().copied().collect();
                    if node_vars.len() > MAX_EXHAUSTIVE_CHECK_VARS {
                        return Err(Error::TooManyVarsForExhaustiveCheck {
                            n: node_vars.len(),
                            max: MAX_EXHAUSTIVE_CHECK_VARS,
                        });
                    }
                    for mask in 0..(1u64 << node_vars.len()) {
                        let true_vars: BTreeSet<VarId> = node_vars
                            .iter()
                            .enumerate()
                            .filter(|(b, _)| mask & (1 << b) != 0)
                            .map(|(_, &v)| v)
                            .collect();
                        let values = self.eval_all(&true_vars);
                        if cs.iter().filter(|c| values[c.0]).count() >= 2 {
                            return Ok(DeterminismStatus::NotDeterministic(GateId(i)));
                        }
                    }
                }
                Ok(DeterminismStatus::Deterministic)
            }
        }
    }

    fn eval_all(&self, true_vars: &BTreeSet<VarId>) -> Vec<bool> {
        let mut values: Vec<bool> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                DdnnfNode::Lit(lit) => lit.positive == true_vars.contains(&lit.var),
                DdnnfNode::And(cs) => cs.iter().all(|c| values[c.0]),
                DdnnfNode::Or(cs) => cs.iter().any(|c| values[c.0]),
                DdnnfNode::True => true,
                DdnnfNode::False => false,
            };
            values.push(v);
        }
        values
    }

    /// Marks exhaustively verified determinism on the circuit, failing if
    /// the check refutes it or exceeds the guard.
    pub fn verify_deterministic(mut self) -> Result<Self> {
        match self.check_deterministic(DeterminismMode::Exhaustive)? {
            DeterminismStatus::Deterministic => {
                self.determinism = DeterminismProvenance::CheckedExhaustive;
                Ok(self)
            }
            DeterminismStatus::NotDeterministic(g) => Err(Error::NotDeterministic(g)),
            DeterminismStatus::Trusted => unreachable!("exhaustive mode never trusts"),
        }
    }

    /// Replaces every literal of `var` with a constant. `var` leaves the
    /// endogenous variable map: the result is a game over the remaining
    /// variables. Preserves decomposability and determinism.
    pub fn substitute(&self, var: VarId, value: bool) -> Ddnnf {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                DdnnfNode::Lit(lit) if lit.var == var => {
                    if lit.positive == value {
                        DdnnfNode::True
                    } else {
                        DdnnfNode::False
                    }
                }
                other => other.clone(),
            })
            .collect();
        Ddnnf {
            nodes,
            root: self.root,
            num_vars: self.num_vars,
            var_map: self.var_map.without(var),
            determinism: self.determinism,
        }
    }

    /// Conjoins a `(v or not v)` node for every variable of `universe`
    /// missing from the root's variable set. All of `universe` must be
    /// declared endogenous.
    pub fn complete_vars(&self, universe: &[VarId]) -> Result<Ddnnf> {
        for &v in universe {
            if !self.var_map.is_endogenous(v) {
                return Err(Error::NotEndogenous(FactId(v.0)));
            }
        }
        let vars = self.compute_vars();
        let present = vars.get(self.root);
        let missing: Vec<VarId> = universe
            .iter()
            .copied()
            .filter(|v| !present.contains(v))
            .collect();
        if missing.is_empty() {
            return Ok(self.clone());
        }
        let mut nodes = self.nodes.clone();
        let mut conjuncts = vec![self.root];
        for v in missing {
            let pos = NodeId(nodes.len());
            nodes.push(DdnnfNode::Lit(Lit::pos(v)));
            let neg = NodeId(nodes.len());
            nodes.push(DdnnfNode::Lit(Lit::neg(v)));
            let or = NodeId(nodes.len());
            nodes.push(DdnnfNode::Or(vec![pos, neg]));
            conjuncts.push(or);
        }
        let root = NodeId(nodes.len());
        nodes.push(DdnnfNode::And(conjuncts));
        Ddnnf::new(
            nodes,
            root,
            self.num_vars,
            self.var_map.clone(),
            self.determinism,
        )
    }

    /// Rewrites the circuit so every And/Or node has fan-in exactly 0 or 2:
    /// single children get a neutral constant sibling, wider nodes fold into
    /// left-associated binary chains.
    pub fn normalize_fanin2(&self) -> Ddnnf {
        let mut nodes: Vec<DdnnfNode> = Vec::with_capacity(self.nodes.len());
        let mut map: Vec<NodeId> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let new_id = match node {
                DdnnfNode::Lit(l) => push(&mut nodes, DdnnfNode::Lit(*l)),
                DdnnfNode::True => push(&mut nodes, DdnnfNode::True),
                DdnnfNode::False => push(&mut nodes, DdnnfNode::False),
                DdnnfNode::And(cs) | DdnnfNode::Or(cs) => {
                    let is_and = matches!(node, DdnnfNode::And(_));
                    let children: Vec<NodeId> = cs.iter().map(|c| map[c.0]).collect();
                    match children.len() {
                        0 => {
                            let mk = if is_and {
                                DdnnfNode::And(vec![])
                            } else {
                                DdnnfNode::Or(vec![])
                            };
                            push(&mut nodes, mk)
                        }
                        1 => {
                            let unit = if is_and {
                                push(&mut nodes, DdnnfNode::True)
                            } else {
                                push(&mut nodes, DdnnfNode::False)
                            };
                            let mk = if is_and {
                                DdnnfNode::And(vec![children[0], unit])
                            } else {
                                DdnnfNode::Or(vec![children[0], unit])
                            };
                            push(&mut nodes, mk)
                        }
                        _ => {
                            let mut acc = children[0];
                            for &c in &children[1..] {
                                let mk = if is_and {
                                    DdnnfNode::And(vec![acc, c])
                                } else {
                                    DdnnfNode::Or(vec![acc, c])
                                };
                                acc = push(&mut nodes, mk);
                            }
                            acc
                        }
                    }
                }
            };
            map.push(new_id);
        }
        Ddnnf {
            nodes,
            root: map[self.root.0],
            num_vars: self.num_vars,
            var_map: self.var_map.clone(),
            determinism: self.determinism,
        }
    }

    /// Removes the auxiliary (non-endogenous) variables from a compiled
    /// circuit: drops unsatisfiable nodes, drops nodes unreachable from the
    /// root, and replaces auxiliary literals with True. The result is an
    /// equivalent d-DNNF over the fact variables; the node count never grows.
    pub fn purge_tseytin(&self) -> Ddnnf {
        // Satisfiability marking is sound bottom-up thanks to
        // decomposability: an And of satisfiable children over disjoint
        // variables is satisfiable.
        let mut sat: Vec<bool> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let s = match node {
                DdnnfNode::Lit(_) | DdnnfNode::True => true,
                DdnnfNode::False => false,
                DdnnfNode::And(cs) => cs.iter().all(|c| sat[c.0]),
                DdnnfNode::Or(cs) => cs.iter().any(|c| sat[c.0]),
            };
            sat.push(s);
        }

        let false_circuit = || Ddnnf {
            nodes: vec![DdnnfNode::False],
            root: NodeId(0),
            num_vars: self.num_vars,
            var_map: self.var_map.clone(),
            determinism: DeterminismProvenance::TrustedByConstruction,
        };
        if !sat[self.root.0] {
            return false_circuit();
        }

        let mut reachable = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut reachable[n.0], true) {
                continue;
            }
            match &self.nodes[n.0] {
                DdnnfNode::And(cs) => stack.extend(cs.iter().copied()),
                DdnnfNode::Or(cs) => {
                    // Unsatisfiable Or children are dropped, not visited.
                    stack.extend(cs.iter().copied().filter(|c| sat[c.0]))
                }
                _ => {}
            }
        }

        let mut map: Vec<Option<NodeId>> = vec![None; self.nodes.len()];
        let mut nodes: Vec<DdnnfNode> = Vec::new();
        let mut shared_true: Option<NodeId> = None;
        for (i, node) in self.nodes.iter().enumerate() {
            if !reachable[i] || !sat[i] {
                continue;
            }
            let new_node = match node {
                DdnnfNode::Lit(lit) if !self.var_map.is_endogenous(lit.var) => {
                    let id = *shared_true
                        .get_or_insert_with(|| push(&mut nodes, DdnnfNode::True));
                    map[i] = Some(id);
                    continue;
                }
                DdnnfNode::Lit(lit) => DdnnfNode::Lit(*lit),
                DdnnfNode::True => DdnnfNode::True,
                DdnnfNode::False => unreachable!("unsat nodes are skipped"),
                DdnnfNode::And(cs) => {
                    DdnnfNode::And(cs.iter().map(|c| map[c.0].unwrap()).collect())
                }
                DdnnfNode::Or(cs) => DdnnfNode::Or(
                    cs.iter()
                        .filter(|c| sat[c.0])
                        .map(|c| map[c.0].unwrap())
                        .collect(),
                ),
            };
            map[i] = Some(push(&mut nodes, new_node));
        }

        Ddnnf {
            nodes,
            root: map[self.root.0].expect("root is reachable and satisfiable"),
            num_vars: self.num_vars,
            var_map: self.var_map.clone(),
            determinism: DeterminismProvenance::TrustedByConstruction,
        }
    }

    /// Converts an NNF-shaped circuit (negations only directly above
    /// variables) into a d-DNNF, with determinism established per `mode`.
    /// Exogenous variable gates are rejected; fix them first.
    pub fn from_circuit(circuit: &BooleanCircuit, mode: DeterminismMode) -> Result<Ddnnf> {
        let db = circuit.database();
        let mut nodes: Vec<DdnnfNode> = Vec::with_capacity(circuit.len());
        for (i, gate) in circuit.gates().iter().enumerate() {
            let check_endo = |f: FactId| -> Result<VarId> {
                if !db.is_endogenous(f) {
                    return Err(Error::ExogenousInEncoding(f));
                }
                Ok(VarId(f.0))
            };
            let node = match gate {
                Gate::Var(f) => DdnnfNode::Lit(Lit::pos(check_endo(*f)?)),
                Gate::Not(c) => match circuit.gate(*c) {
                    Gate::Var(f) => DdnnfNode::Lit(Lit::neg(check_endo(*f)?)),
                    _ => {
                        return Err(Error::UnsupportedGate(
                            GateId(i),
                            "negation above a non-variable gate".into(),
                        ))
                    }
                },
                Gate::And(cs) => DdnnfNode::And(cs.iter().map(|c| NodeId(c.0)).collect()),
                Gate::Or(cs) => DdnnfNode::Or(cs.iter().map(|c| NodeId(c.0)).collect()),
                Gate::True => DdnnfNode::True,
                Gate::False => DdnnfNode::False,
            };
            nodes.push(node);
        }
        let var_map = VarMap::for_database(db);
        let num_vars = var_map.endo_vars().last().map(|v| v.0).unwrap_or(1);
        let ddnnf = Ddnnf::new(
            nodes,
            NodeId(circuit.output().0),
            num_vars,
            var_map,
            DeterminismProvenance::TrustedByConstruction,
        )?;
        match mode {
            DeterminismMode::Trusted => Ok(ddnnf),
            DeterminismMode::Exhaustive => ddnnf.verify_deterministic(),
        }
    }

    /// The induced set function over the endogenous facts.
    pub fn game(&self) -> Result<DdnnfGame<'_>> {
        let players: Vec<FactId> = self
            .var_map
            .endo_vars()
            .into_iter()
            .map(|v| FactId(v.0))
            .collect();
        if players.len() > MAX_GAME_FACTS {
            return Err(Error::TooManyFactsForBruteForce {
                n: players.len(),
                max: MAX_GAME_FACTS,
            });
        }
        Ok(DdnnfGame {
            ddnnf: self,
            players,
        })
    }

    /// Writes the NNF dialect described in the module docs.
    pub fn write_nnf(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(
            out,
            "nnf {} {} {}",
            self.nodes.len(),
            self.edge_count(),
            self.num_vars
        )
        .unwrap();
        for node in &self.nodes {
            match node {
                DdnnfNode::Lit(lit) => writeln!(out, "L {lit}").unwrap(),
                DdnnfNode::True => writeln!(out, "A 0").unwrap(),
                DdnnfNode::False => writeln!(out, "O 0 0").unwrap(),
                DdnnfNode::And(cs) => {
                    write!(out, "A {}", cs.len()).unwrap();
                    for c in cs {
                        write!(out, " {}", c.0).unwrap();
                    }
                    writeln!(out).unwrap();
                }
                DdnnfNode::Or(cs) => {
                    write!(out, "O 0 {}", cs.len()).unwrap();
                    for c in cs {
                        write!(out, " {}", c.0).unwrap();
                    }
                    writeln!(out).unwrap();
                }
            }
        }
        out
    }

    /// Parses the NNF dialect. The variable map comes from the companion
    /// DIMACS file; determinism is recorded as trusted-by-construction since
    /// the file format carries no way to verify it.
    pub fn parse_nnf(text: &str, var_map: VarMap) -> Result<Ddnnf> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('c'));
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: "empty NNF file".into(),
        })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let (node_count, edge_count, num_vars) = match toks.as_slice() {
            ["nnf", v, e, n] => {
                let v = v.parse::<usize>().ok();
                let e = e.parse::<usize>().ok();
                let n = n.parse::<u32>().ok();
                match (v, e, n) {
                    (Some(v), Some(e), Some(n)) => (v, e, n),
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("invalid NNF header `{header}`"),
                        })
                    }
                }
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `nnf V E n` header, got `{header}`"),
                })
            }
        };

        let mut nodes: Vec<DdnnfNode> = Vec::with_capacity(node_count);
        let mut edges = 0usize;
        for (line_no, line) in lines {
            let bad = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let parse_children = |toks: &[&str], declared: usize| -> Result<Vec<NodeId>> {
                if toks.len() != declared {
                    return Err(bad(format!(
                        "expected {declared} children, got {}",
                        toks.len()
                    )));
                }
                toks.iter()
                    .map(|t| {
                        let id: usize = t
                            .parse()
                            .map_err(|_| bad(format!("invalid child id `{t}`")))?;
                        if id >= nodes.len() {
                            return Err(bad(format!(
                                "child {id} is not an earlier node"
                            )));
                        }
                        Ok(NodeId(id))
                    })
                    .collect()
            };
            let node = match toks.as_slice() {
                ["L", l] => {
                    let value: i64 = l
                        .parse()
                        .map_err(|_| bad(format!("invalid literal `{l}`")))?;
                    let lit = Lit::from_dimacs(value)?;
                    if lit.var.0 > num_vars {
                        return Err(bad(format!(
                            "literal variable {} out of range 1..={num_vars}",
                            lit.var
                        )));
                    }
                    DdnnfNode::Lit(lit)
                }
                ["A", c, rest @ ..] => {
                    let c: usize =
                        c.parse().map_err(|_| bad(format!("invalid count `{c}`")))?;
                    if c == 0 && rest.is_empty() {
                        DdnnfNode::True
                    } else {
                        let children = parse_children(rest, c)?;
                        edges += children.len();
                        DdnnfNode::And(children)
                    }
                }
                ["O", _j, c, rest @ ..] => {
                    let c: usize =
                        c.parse().map_err(|_| bad(format!("invalid count `{c}`")))?;
                    if c == 0 && rest.is_empty() {
                        DdnnfNode::False
                    } else {
                        let children = parse_children(rest, c)?;
                        edges += children.len();
                        DdnnfNode::Or(children)
                    }
                }
                _ => return Err(bad(format!("unrecognized node line `{line}`"))),
            };
            nodes.push(node);
        }
        if nodes.len() != node_count {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "header declares {node_count} nodes but {} were given",
                    nodes.len()
                ),
            });
        }
        if edges != edge_count {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "header declares {edge_count} edges but {edges} were given"
                ),
            });
        }
        let root = NodeId(nodes.len() - 1);
        Ddnnf::new(
            nodes,
            root,
            num_vars,
            var_map,
            DeterminismProvenance::TrustedByConstruction,
        )
    }
}

fn push(nodes: &mut Vec<DdnnfNode>, node: DdnnfNode) -> NodeId {
    nodes.push(node);
    NodeId(nodes.len() - 1)
}

/// [`SetFunction`] view of a d-DNNF over its endogenous facts.
pub struct DdnnfGame<'a> {
    ddnnf: &'a Ddnnf,
    players: Vec<FactId>,
}

impl SetFunction for DdnnfGame<'_> {
    fn players(&self) -> &[FactId] {
        &self.players
    }

    fn eval(&self, coalition: u128) -> bool {
        let true_vars: BTreeSet<VarId> = self
            .players
            .iter()
            .enumerate()
            .filter(|(i, _)| coalition & (1u128 << i) != 0)
            .map(|(_, f)| VarId(f.0))
            .collect();
        self.ddnnf.evaluate(&true_vars)
    }
}
