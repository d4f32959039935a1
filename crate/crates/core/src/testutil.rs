//! Shared fixtures for unit tests.

use std::collections::BTreeSet;

use num::bigint::BigInt;

use crate::circuit::{BooleanCircuit, Gate, GateId};
use crate::lineage::{Database, DnfLineage, Fact, FactId};
use crate::Rational;

pub(crate) fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn set(ids: &[u32]) -> BTreeSet<FactId> {
    ids.iter().map(|&i| FactId(i)).collect()
}

/// The flight database: endogenous flights a1..a8 (ids 1..8) and exogenous
/// airports b1..b8 (ids 9..16).
pub(crate) fn flight_database() -> Database {
    let flights = [
        "Flights(JFK,CDG)",
        "Flights(EWR,LHR)",
        "Flights(BOS,LHR)",
        "Flights(LHR,CDG)",
        "Flights(LHR,ORY)",
        "Flights(LAX,MUC)",
        "Flights(MUC,ORY)",
        "Flights(LHR,MUC)",
    ];
    let airports = [
        "Airports(JFK,USA)",
        "Airports(EWR,USA)",
        "Airports(BOS,USA)",
        "Airports(LAX,USA)",
        "Airports(LHR,EN)",
        "Airports(MUC,GR)",
        "Airports(ORY,FR)",
        "Airports(CDG,FR)",
    ];
    let mut facts = Vec::new();
    for (i, label) in flights.iter().enumerate() {
        facts.push(Fact::endo(i as u32 + 1, *label));
    }
    for (i, label) in airports.iter().enumerate() {
        facts.push(Fact::exo(i as u32 + 9, *label));
    }
    Database::new(facts).unwrap()
}

/// Lineage of the connected-country query on the flight database: six
/// monomials mixing flights and airports.
pub(crate) fn flight_lineage() -> DnfLineage {
    DnfLineage::new(
        flight_database(),
        [
            set(&[1, 9, 16]),
            set(&[2, 4, 10, 16]),
            set(&[2, 5, 10, 15]),
            set(&[3, 4, 11, 16]),
            set(&[3, 5, 11, 15]),
            set(&[6, 7, 13, 15]),
        ],
    )
    .unwrap()
}

/// The endogenous part of [`flight_lineage`]:
/// a1 | a2a4 | a2a5 | a3a4 | a3a5 | a6a7.
pub(crate) fn endo_flight_lineage() -> DnfLineage {
    DnfLineage::new(
        flight_database(),
        [
            set(&[1]),
            set(&[2, 4]),
            set(&[2, 5]),
            set(&[3, 4]),
            set(&[3, 5]),
            set(&[6, 7]),
        ],
    )
    .unwrap()
}

/// The variant without the direct a1 flight: a2a4 | a2a5 | a3a4 | a3a5 | a6a7.
pub(crate) fn endo_no_direct_lineage() -> DnfLineage {
    DnfLineage::new(
        flight_database(),
        [
            set(&[2, 4]),
            set(&[2, 5]),
            set(&[3, 4]),
            set(&[3, 5]),
            set(&[6, 7]),
        ],
    )
    .unwrap()
}

/// A deterministic, decomposable circuit computing the same function as
/// [`endo_flight_lineage`]: a1 | (a2|a3)(a4|a5) | a6a7, with every
/// disjunction written in the `x or (not x and y)` style.
pub(crate) fn deterministic_flight_circuit() -> BooleanCircuit {
    let g = |i: usize| GateId(i);
    let gates = vec![
        Gate::Var(FactId(1)),        // 0: a1
        Gate::Var(FactId(2)),        // 1: a2
        Gate::Var(FactId(3)),        // 2: a3
        Gate::Var(FactId(4)),        // 3: a4
        Gate::Var(FactId(5)),        // 4: a5
        Gate::Var(FactId(6)),        // 5: a6
        Gate::Var(FactId(7)),        // 6: a7
        Gate::Not(g(0)),             // 7: !a1
        Gate::Not(g(1)),             // 8: !a2
        Gate::Not(g(3)),             // 9: !a4
        Gate::And(vec![g(8), g(2)]), // 10: !a2 a3
        Gate::Or(vec![g(1), g(10)]), // 11: a2 | !a2 a3
        Gate::And(vec![g(9), g(4)]), // 12: !a4 a5
        Gate::Or(vec![g(3), g(12)]), // 13: a4 | !a4 a5
        Gate::And(vec![g(11), g(13)]), // 14: (a2|a3)(a4|a5)
        Gate::Not(g(2)),             // 15: !a3
        Gate::And(vec![g(8), g(15)]), // 16: !a2 !a3
        Gate::Not(g(4)),             // 17: !a5
        Gate::And(vec![g(9), g(17)]), // 18: !a4 !a5
        Gate::And(vec![g(11), g(18)]), // 19: (a2|a3) !a4 !a5
        Gate::Or(vec![g(16), g(19)]), // 20: not (a2|a3)(a4|a5)
        Gate::And(vec![g(5), g(6)]), // 21: a6 a7
        Gate::And(vec![g(20), g(21)]), // 22
        Gate::Or(vec![g(14), g(22)]), // 23: (a2|a3)(a4|a5) | a6 a7
        Gate::And(vec![g(7), g(23)]), // 24
        Gate::Or(vec![g(0), g(24)]), // 25: a1 | ...
    ];
    BooleanCircuit::new(flight_database(), gates, g(25)).unwrap()
}
