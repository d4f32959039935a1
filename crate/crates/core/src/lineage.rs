//! Facts, databases and DNF lineage expressions, plus brute-force oracles.
//!
//! A [`Database`] is a set of facts partitioned into *endogenous* facts (the
//! players of the attribution game) and *exogenous* facts (fixed context that
//! is always present). A [`DnfLineage`] is a positive DNF over fact ids: the
//! query answer holds on a subset `E` of the endogenous facts iff some
//! monomial has all its endogenous facts in `E` (exogenous facts count as
//! present).
//!
//! The brute-force functions in this module enumerate coalitions explicitly
//! and serve as ground-truth oracles for the polynomial-time algorithms in
//! the rest of the crate. They are guarded by [`MAX_BRUTE_FORCE_FACTS`].
//!
//! # Text format
//!
//! ```text
//! # comment
//! facts 3
//! 1 endo Flights(JFK,CDG)
//! 2 endo Flights(EWR,LHR)
//! 3 exo  Airports(JFK,USA)
//! monomials 2
//! 1 3
//! 2
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Each fact line is
//! `id kind label` with `kind` one of `endo`, `exo`; the label is the rest of
//! the line. Monomial lines list fact ids separated by whitespace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::bigint::BigInt;
use num::{BigUint, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::shapley_coefficients;
use crate::{Error, Rational, Result};

/// Largest number of players for which brute-force enumeration is allowed.
pub const MAX_BRUTE_FORCE_FACTS: usize = 22;

/// Largest number of players representable in a coalition bitmask.
pub const MAX_GAME_FACTS: usize = 128;

/// Identifier of a fact; unique within a database, `>= 1`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FactId(pub u32);

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether a fact takes part in the attribution game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactKind {
    #[serde(rename = "endo")]
    Endogenous,
    #[serde(rename = "exo")]
    Exogenous,
}

impl fmt::Display for FactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactKind::Endogenous => write!(f, "endo"),
            FactKind::Exogenous => write!(f, "exo"),
        }
    }
}

/// A database fact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub id: FactId,
    pub kind: FactKind,
    pub label: String,
}

impl Fact {
    pub fn endo(id: u32, label: impl Into<String>) -> Self {
        Fact {
            id: FactId(id),
            kind: FactKind::Endogenous,
            label: label.into(),
        }
    }

    pub fn exo(id: u32, label: impl Into<String>) -> Self {
        Fact {
            id: FactId(id),
            kind: FactKind::Exogenous,
            label: label.into(),
        }
    }
}

/// A set of facts partitioned into endogenous and exogenous parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Fact>", into = "Vec<Fact>")]
pub struct Database {
    facts: BTreeMap<FactId, Fact>,
}

impl Database {
    pub fn new(facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for fact in facts {
            if fact.id.0 == 0 {
                return Err(Error::InvalidCircuit("fact id 0 is reserved".into()));
            }
            if map.insert(fact.id, fact.clone()).is_some() {
                return Err(Error::DuplicateFact(fact.id));
            }
        }
        Ok(Database { facts: map })
    }

    pub fn empty() -> Self {
        Database {
            facts: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn get(&self, id: FactId) -> Option<&Fact> {
        self.facts.get(&id)
    }

    pub fn contains(&self, id: FactId) -> bool {
        self.facts.contains_key(&id)
    }

    pub fn is_endogenous(&self, id: FactId) -> bool {
        matches!(
            self.facts.get(&id),
            Some(Fact {
                kind: FactKind::Endogenous,
                ..
            })
        )
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.values()
    }

    /// Ids of the endogenous facts in ascending order.
    pub fn endogenous_ids(&self) -> Vec<FactId> {
        self.facts
            .values()
            .filter(|f| f.kind == FactKind::Endogenous)
            .map(|f| f.id)
            .collect()
    }

    /// Ids of the exogenous facts in ascending order.
    pub fn exogenous_ids(&self) -> Vec<FactId> {
        self.facts
            .values()
            .filter(|f| f.kind == FactKind::Exogenous)
            .map(|f| f.id)
            .collect()
    }

    pub fn label(&self, id: FactId) -> Option<&str> {
        self.facts.get(&id).map(|f| f.label.as_str())
    }
}

impl TryFrom<Vec<Fact>> for Database {
    type Error = Error;
    fn try_from(v: Vec<Fact>) -> Result<Self> {
        Database::new(v)
    }
}

impl From<Database> for Vec<Fact> {
    fn from(db: Database) -> Self {
        db.facts.into_values().collect()
    }
}

/// A truth assignment to the endogenous facts, given as the set of facts
/// mapped to 1; absent facts are 0. Exogenous facts are always present.
pub type Assignment = BTreeSet<FactId>;

/// A positive DNF over the facts of a database.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfLineage {
    database: Database,
    monomials: Vec<BTreeSet<FactId>>,
}

impl DnfLineage {
    pub fn new(
        database: Database,
        monomials: impl IntoIterator<Item = BTreeSet<FactId>>,
    ) -> Result<Self> {
        let monomials: Vec<BTreeSet<FactId>> = monomials.into_iter().collect();
        for m in &monomials {
            for &id in m {
                if !database.contains(id) {
                    return Err(Error::UnknownFact(id));
                }
            }
        }
        Ok(DnfLineage {
            database,
            monomials,
        })
    }

    pub fn database(&self) -> &Database {
        &self.database
    }

    pub fn monomials(&self) -> &[BTreeSet<FactId>] {
        &self.monomials
    }

    /// True iff no monomial mentions an exogenous fact.
    pub fn is_endogenous_only(&self) -> bool {
        self.monomials
            .iter()
            .all(|m| m.iter().all(|&id| self.database.is_endogenous(id)))
    }

    /// Removes every exogenous fact from every monomial.
    ///
    /// Exogenous facts are always present, so this never changes the value of
    /// [`DnfLineage::evaluate`] on any assignment. A monomial made entirely of
    /// exogenous facts becomes empty, i.e. always true.
    pub fn fix_exogenous(&self) -> DnfLineage {
        let monomials = self
            .monomials
            .iter()
            .map(|m| {
                m.iter()
                    .copied()
                    .filter(|&id| self.database.is_endogenous(id))
                    .collect()
            })
            .collect();
        DnfLineage {
            database: self.database.clone(),
            monomials,
        }
    }

    /// Evaluates the DNF. Endogenous facts are read from `assignment`;
    /// exogenous facts are always present.
    pub fn evaluate(&self, assignment: &Assignment) -> bool {
        self.monomials.iter().any(|m| {
            m.iter()
                .all(|&id| !self.database.is_endogenous(id) || assignment.contains(&id))
        })
    }

    /// The induced set function over all endogenous facts of the database,
    /// with coalitions encoded as bitmasks.
    pub fn endo_game(&self) -> Result<DnfGame> {
        let players = self.database.endogenous_ids();
        if players.len() > MAX_GAME_FACTS {
            return Err(Error::TooManyFactsForBruteForce {
                n: players.len(),
                max: MAX_GAME_FACTS,
            });
        }
        let index: BTreeMap<FactId, usize> =
            players.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let monomial_masks = self
            .monomials
            .iter()
            .map(|m| {
                m.iter()
                    .filter_map(|id| index.get(id))
                    .fold(0u128, |acc, &i| acc | (1u128 << i))
            })
            .collect();
        Ok(DnfGame {
            players,
            monomial_masks,
        })
    }

    /// Parses the text format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines.next().ok_or_else(|| Error::Parse {
                line: text.lines().count() + 1,
                message: format!("unexpected end of input, expected {what}"),
            })
        };

        let (line_no, header) = next("`facts N` header")?;
        let fact_count = parse_count(line_no, header, "facts")?;
        let mut facts = Vec::with_capacity(fact_count);
        for _ in 0..fact_count {
            let (line_no, line) = next("a fact line")?;
            facts.push(parse_fact_line(line_no, line)?);
        }
        let database = Database::new(facts)?;

        let (line_no, header) = next("`monomials M` header")?;
        let monomial_count = parse_count(line_no, header, "monomials")?;
        let mut monomials = Vec::with_capacity(monomial_count);
        for _ in 0..monomial_count {
            let (line_no, line) = next("a monomial line")?;
            let mut ids = BTreeSet::new();
            for tok in line.split_whitespace() {
                let id: u32 = tok.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid fact id `{tok}`"),
                })?;
                ids.insert(FactId(id));
            }
            monomials.push(ids);
        }
        if let Some((line_no, line)) = lines.next() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unexpected trailing content `{line}`"),
            });
        }
        DnfLineage::new(database, monomials)
    }

    /// Writes the text format. Fails on empty monomials, which the format
    /// cannot represent.
    pub fn to_text(&self) -> Result<String> {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(out, "facts {}", self.database.len()).unwrap();
        for fact in self.database.facts() {
            writeln!(out, "{} {} {}", fact.id, fact.kind, fact.label).unwrap();
        }
        writeln!(out, "monomials {}", self.monomials.len()).unwrap();
        for m in &self.monomials {
            if m.is_empty() {
                return Err(Error::UnrepresentableLineage);
            }
            let ids: Vec<String> = m.iter().map(|id| id.to_string()).collect();
            writeln!(out, "{}", ids.join(" ")).unwrap();
        }
        Ok(out)
    }
}

fn parse_count(line_no: usize, line: &str, keyword: &str) -> Result<usize> {
    let mut toks = line.split_whitespace();
    let (Some(kw), Some(n), None) = (toks.next(), toks.next(), toks.next()) else {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected `{keyword} N`, got `{line}`"),
        });
    };
    if kw != keyword {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected `{keyword} N`, got `{line}`"),
        });
    }
    n.parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("invalid count `{n}`"),
    })
}

fn parse_fact_line(line_no: usize, line: &str) -> Result<Fact> {
    let bad = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let (id_tok, rest) = line
        .split_once(char::is_whitespace)
        .ok_or_else(|| bad(format!("expected `id kind label`, got `{line}`")))?;
    let id: u32 = id_tok
        .parse()
        .map_err(|_| bad(format!("invalid fact id `{id_tok}`")))?;
    if id == 0 {
        return Err(bad("fact id must be >= 1".into()));
    }
    let rest = rest.trim_start();
    let (kind_tok, label) = match rest.split_once(char::is_whitespace) {
        Some((k, l)) => (k, l.trim()),
        None => (rest, ""),
    };
    let kind = match kind_tok {
        "endo" => FactKind::Endogenous,
        "exo" => FactKind::Exogenous,
        other => return Err(bad(format!("invalid fact kind `{other}`"))),
    };
    if label.is_empty() {
        return Err(bad("missing fact label".into()));
    }
    Ok(Fact {
        id: FactId(id),
        kind,
        label: label.to_string(),
    })
}

/// A 0/1 game over an ordered list of facts. Coalitions are bitmasks: bit `i`
/// set means `players()[i]` is in the coalition.
pub trait SetFunction {
    fn players(&self) -> &[FactId];
    fn eval(&self, coalition: u128) -> bool;
}

impl<G: SetFunction + ?Sized> SetFunction for &G {
    fn players(&self) -> &[FactId] {
        (**self).players()
    }

    fn eval(&self, coalition: u128) -> bool {
        (**self).eval(coalition)
    }
}

/// A real-valued game over an ordered list of facts.
pub trait RealSetFunction {
    fn players(&self) -> &[FactId];
    fn value(&self, coalition: u128) -> Rational;
}

/// [`SetFunction`] view of a DNF lineage, with precomputed monomial masks.
#[derive(Debug, Clone)]
pub struct DnfGame {
    players: Vec<FactId>,
    monomial_masks: Vec<u128>,
}

impl SetFunction for DnfGame {
    fn players(&self) -> &[FactId] {
        &self.players
    }

    fn eval(&self, coalition: u128) -> bool {
        self.monomial_masks.iter().any(|&m| m & !coalition == 0)
    }
}

/// A game given by an arbitrary closure over coalition masks.
pub struct FnGame<F: Fn(u128) -> bool> {
    players: Vec<FactId>,
    eval: F,
}

impl<F: Fn(u128) -> bool> FnGame<F> {
    pub fn new(players: Vec<FactId>, eval: F) -> Self {
        assert!(players.len() <= MAX_GAME_FACTS);
        FnGame { players, eval }
    }
}

impl<F: Fn(u128) -> bool> SetFunction for FnGame<F> {
    fn players(&self) -> &[FactId] {
        &self.players
    }

    fn eval(&self, coalition: u128) -> bool {
        (self.eval)(coalition)
    }
}

/// Bitmask of `facts` relative to `players`. Facts not in `players` are
/// ignored.
pub fn coalition_mask<'a>(
    players: &[FactId],
    facts: impl IntoIterator<Item = &'a FactId>,
) -> u128 {
    let mut mask = 0u128;
    for id in facts {
        if let Some(i) = players.iter().position(|p| p == id) {
            mask |= 1u128 << i;
        }
    }
    mask
}

fn check_brute_force_size(n: usize) -> Result<()> {
    if n > MAX_BRUTE_FORCE_FACTS {
        return Err(Error::TooManyFactsForBruteForce {
            n,
            max: MAX_BRUTE_FORCE_FACTS,
        });
    }
    Ok(())
}

/// Inserts a zero bit at position `pos`, shifting higher bits up.
fn insert_bit(mask: u128, pos: usize) -> u128 {
    let low = mask & ((1u128 << pos) - 1);
    let high = (mask >> pos) << (pos + 1);
    high | low
}

/// Number of coalitions of size `k` on which `game` is true, by exhaustive
/// enumeration.
pub fn count_slices(game: &impl SetFunction, k: usize) -> Result<BigUint> {
    Ok(count_slices_all(game)?
        .get(k)
        .cloned()
        .unwrap_or_else(BigUint::zero))
}

/// `out[k]` = number of coalitions of size `k` on which `game` is true, for
/// every `k = 0..=n`, by exhaustive enumeration.
pub fn count_slices_all(game: &impl SetFunction) -> Result<Vec<BigUint>> {
    let n = game.players().len();
    check_brute_force_size(n)?;
    let mut counts = vec![0u64; n + 1];
    for mask in 0..(1u128 << n) {
        if game.eval(mask) {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    Ok(counts.into_iter().map(BigUint::from).collect())
}

/// Exact Shapley value of `fact` in `game` by direct enumeration of all
/// coalitions not containing `fact`.
pub fn brute_force_shapley(game: &impl SetFunction, fact: FactId) -> Result<Rational> {
    let n = game.players().len();
    check_brute_force_size(n)?;
    let pos = game
        .players()
        .iter()
        .position(|&p| p == fact)
        .ok_or(Error::UnknownFact(fact))?;
    let fact_bit = 1u128 << pos;
    let mut gained = vec![0i64; n.max(1)];
    let mut lost = vec![0i64; n.max(1)];
    for rest in 0..(1u128 << (n - 1)) {
        let without = insert_bit(rest, pos);
        let with = without | fact_bit;
        let k = without.count_ones() as usize;
        match (game.eval(with), game.eval(without)) {
            (true, false) => gained[k] += 1,
            (false, true) => lost[k] += 1,
            _ => {}
        }
    }
    let coeffs = shapley_coefficients(n);
    let mut total = Rational::zero();
    for k in 0..n {
        let delta = gained[k] - lost[k];
        if delta != 0 {
            total += &coeffs[k] * Rational::from(BigInt::from(delta));
        }
    }
    Ok(total)
}

/// Restriction of a game to the players other than one fixed fact, with that
/// fact pinned present or absent.
struct PinnedGame<'a, G: SetFunction> {
    inner: &'a G,
    players: Vec<FactId>,
    pos: usize,
    pinned_present: bool,
}

impl<'a, G: SetFunction> SetFunction for PinnedGame<'a, G> {
    fn players(&self) -> &[FactId] {
        &self.players
    }

    fn eval(&self, coalition: u128) -> bool {
        let mut full = insert_bit(coalition, self.pos);
        if self.pinned_present {
            full |= 1u128 << self.pos;
        }
        self.inner.eval(full)
    }
}

/// Exact Shapley value of `fact` computed from stratified coalition counts:
/// the sum over sizes `k` of `k!(n-k-1)!/n!` times the difference between the
/// size-`k` counts with `fact` pinned present and pinned absent. Asserts
/// agreement with [`brute_force_shapley`].
pub fn brute_force_shapley_from_slices(
    game: &impl SetFunction,
    fact: FactId,
) -> Result<Rational> {
    let n = game.players().len();
    check_brute_force_size(n)?;
    let pos = game
        .players()
        .iter()
        .position(|&p| p == fact)
        .ok_or(Error::UnknownFact(fact))?;
    let others: Vec<FactId> = game
        .players()
        .iter()
        .copied()
        .filter(|&p| p != fact)
        .collect();
    let pinned = |pinned_present| PinnedGame {
        inner: game,
        players: others.clone(),
        pos,
        pinned_present,
    };
    let with = count_slices_all(&pinned(true))?;
    let without = count_slices_all(&pinned(false))?;
    let coeffs = shapley_coefficients(n);
    let mut total = Rational::zero();
    for k in 0..n {
        let diff = BigInt::from(with[k].clone()) - BigInt::from(without[k].clone());
        total += &coeffs[k] * Rational::from(diff);
    }
    let direct = brute_force_shapley(game, fact)?;
    assert_eq!(
        total, direct,
        "stratified-count route disagrees with direct enumeration"
    );
    Ok(total)
}

/// Exact Shapley value of `fact` in a real-valued game by direct enumeration.
pub fn brute_force_shapley_value(
    game: &impl RealSetFunction,
    fact: FactId,
) -> Result<Rational> {
    let n = game.players().len();
    check_brute_force_size(n)?;
    let pos = game
        .players()
        .iter()
        .position(|&p| p == fact)
        .ok_or(Error::UnknownFact(fact))?;
    let fact_bit = 1u128 << pos;
    let coeffs = shapley_coefficients(n);
    let mut total = Rational::zero();
    for rest in 0..(1u128 << (n - 1)) {
        let without = insert_bit(rest, pos);
        let k = without.count_ones() as usize;
        let marginal = game.value(without | fact_bit) - game.value(without);
        if !marginal.is_zero() {
            total += &coeffs[k] * marginal;
        }
    }
    Ok(total)
}

/// Shapley values of every player, by brute force.
pub fn brute_force_shapley_all(game: &impl SetFunction) -> Result<Vec<(FactId, Rational)>> {
    game.players()
        .iter()
        .map(|&f| Ok((f, brute_force_shapley(game, f)?)))
        .collect()
}
