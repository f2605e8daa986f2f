#![allow(dead_code)]

use tops_core::grid::{BitTail, GridAxis};
use tops_core::{DyadicCube, DyadicRational, GridSpec, Measure};

pub fn d(s: &str) -> DyadicRational {
    s.parse().unwrap()
}

pub fn cube1(m: i64, c: &str) -> DyadicCube {
    DyadicCube::new(m, vec![d(c)])
}

pub fn standard() -> GridSpec {
    GridSpec::standard(1)
}

/// `D_0 + 1/2`
pub fn shifted() -> GridSpec {
    GridSpec::new(vec![GridAxis::new(d("1/2"), vec![], BitTail::AllZero).unwrap()]).unwrap()
}

/// offset 0, all nesting bits 1: boundary at -1
pub fn all_one() -> GridSpec {
    GridSpec::new(vec![GridAxis::new(d("0"), vec![], BitTail::AllOne).unwrap()]).unwrap()
}

pub fn grids() -> Vec<(&'static str, GridSpec)> {
    vec![("standard", standard()), ("shifted", shifted()), ("all-one", all_one())]
}

pub fn lebesgue() -> Measure {
    Measure::cells(vec![(cube1(0, "-1"), 1.0), (cube1(0, "0"), 1.0)]).unwrap()
}

pub fn mixed_cells() -> Measure {
    Measure::cells(vec![
        (cube1(-1, "-1/2"), 2.0),
        (cube1(-2, "0"), 0.5),
        (DyadicCube::new(-2, vec![d("1/4")]), 3.0),
        (cube1(-2, "1/2"), 3.0),
        (cube1(-1, "1"), 1.0),
    ])
    .unwrap()
}

pub fn two_atoms() -> Measure {
    Measure::atoms(vec![(vec![d("-3/8")], 1.5), (vec![d("5/8")], 0.5)]).unwrap()
}

pub fn seven_atoms() -> Measure {
    let pts = [("-15/8", 0.7), ("-1", 1.3), ("-3/8", 0.4), ("1/8", 2.1), ("3/4", 0.9), ("21/16", 1.6), ("5/2", 0.25)];
    Measure::atoms(pts.iter().map(|(p, m)| (vec![d(p)], *m)).collect()).unwrap()
}

/// `(name, measure, probe scale)`; the probe scale resolves the measure.
pub fn measures() -> Vec<(&'static str, Measure, i64)> {
    vec![
        ("lebesgue", lebesgue(), -3),
        ("two-atoms", two_atoms(), -3),
        ("seven-atoms", seven_atoms(), -3),
        ("mixed-cells", mixed_cells(), -3),
    ]
}
