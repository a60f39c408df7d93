//! Closed-form transition-matrix terms for two-walker diagrams grouped
//! by flip count.
//!
//! A pair amplitude over `t` steps splits into integer path counts
//! attached to a mass power and an interaction power: every diagram
//! contributes `n^{2t-f} (i m)^f e^{i j chi}` where `f` is the total
//! number of internal-state flips across both walkers and `j` the
//! number of steps they spend on a shared site with opposite states.
//! Sorting diagrams by the per-walker split `(f1, f2)` yields classes
//! whose integer coefficients have closed forms at the bottom of the
//! hierarchy (`f <= 3`, nearly ballistic walkers) and at the top
//! (`f >= 2t - 2`, walkers that flip almost every step and barely
//! move). [`lowmass_terms`] and [`highmass_terms`] emit those terms;
//! everything in between is exposed only through the graded evolution
//! oracle.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{BinLabel, Bit, WalkParams};
use crate::error::{Error, Result};
use crate::free::{admissible_f, path_count_c};
use crate::pair::PairBoundary;

/// Where a class sits in the flip-count hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Total flip count at most 3; closed forms from near-ballistic
    /// crossing geometry.
    LowMass,
    /// Total flip count at least `2t - 2`; closed forms from standing
    /// walkers with isolated transport steps.
    HighMass,
    /// No closed form implemented; only the graded oracle covers it.
    Intermediate,
}

/// One `(f1, f2)` diagram class over fixed boundary data.
///
/// Slot 1 runs from `x_in` to `x_out` with `f1` flips, slot 2 from
/// `y_in` to `y_out` with `f2`. `delta_in` and `delta_out` are the
/// relative displacements `x - y` at the start and end of the process.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiagramClass {
    pub f1: u64,
    pub f2: u64,
    pub x_in: i64,
    pub y_in: i64,
    pub x_out: i64,
    pub y_out: i64,
    pub t: u64,
    pub regime: Regime,
    pub delta_in: i64,
    pub delta_out: i64,
}

impl DiagramClass {
    /// Builds a class after checking both flip counts against the
    /// admissible sets of their boundaries.
    pub fn new(
        f1: u64,
        f2: u64,
        x_in: i64,
        y_in: i64,
        x_out: i64,
        y_out: i64,
        t: u64,
    ) -> Result<DiagramClass> {
        if !admissible_f(x_in, x_out, t)?.contains(&f1) {
            return Err(Error::Domain(format!(
                "flip count {f1} not admissible for {x_in} -> {x_out} in {t} steps"
            )));
        }
        if !admissible_f(y_in, y_out, t)?.contains(&f2) {
            return Err(Error::Domain(format!(
                "flip count {f2} not admissible for {y_in} -> {y_out} in {t} steps"
            )));
        }
        let f = f1 + f2;
        let regime = if f <= 3 {
            Regime::LowMass
        } else if f + 2 >= 2 * t {
            Regime::HighMass
        } else {
            Regime::Intermediate
        };
        Ok(DiagramClass {
            f1,
            f2,
            x_in,
            y_in,
            x_out,
            y_out,
            t,
            regime,
            delta_in: x_in - y_in,
            delta_out: x_out - y_out,
        })
    }

    /// Total flip count `f1 + f2`.
    pub fn f(&self) -> u64 {
        self.f1 + self.f2
    }
}

/// All classes with total flip count `n`: every `(f1, f2)` pair drawn
/// from the two admissible sets. Unreachable boundaries give an empty
/// table.
pub fn class_table(
    x_in: i64,
    y_in: i64,
    x_out: i64,
    y_out: i64,
    t: u64,
    n: u64,
) -> Vec<DiagramClass> {
    let set1 = match admissible_f(x_in, x_out, t) {
        Ok(s) => s,
        Err(_) => return Vec::new(),
    };
    let set2 = match admissible_f(y_in, y_out, t) {
        Ok(s) => s,
        Err(_) => return Vec::new(),
    };
    let mut out = Vec::new();
    for &f1 in &set1 {
        if f1 > n {
            continue;
        }
        let f2 = n - f1;
        if set2.contains(&f2) {
            out.push(
                DiagramClass::new(f1, f2, x_in, y_in, x_out, y_out, t)
                    .expect("admissible split"),
            );
        }
    }
    out.sort_by_key(|c| c.f1);
    out
}

/// Parity of the interaction count, fixed by the boundary alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Interaction-count parity from the relative order of the walkers:
/// even when the strict order at the start survives to the end, odd
/// when it flips.
pub fn interaction_parity(b: &PairBoundary) -> Result<Parity> {
    if b.x_in >= b.y_in {
        return Err(Error::Domain(format!(
            "input order must be strict, got x_in = {} >= y_in = {}",
            b.x_in, b.y_in
        )));
    }
    if b.x_out == b.y_out {
        if b.b1 == b.b2 {
            return Err(Error::Exclusion(format!(
                "coincident output site {} with equal internal state",
                b.x_out
            )));
        }
        return Err(Error::Domain(format!(
            "coincident output site {} leaves the relative order undefined",
            b.x_out
        )));
    }
    if b.x_out < b.y_out {
        Ok(Parity::Even)
    } else {
        Ok(Parity::Odd)
    }
}

/// One integer-weighted operator term of a class transition matrix.
///
/// `labels` are the per-slot matrix units (final bit, initial bit);
/// `integer_coeff` is the path multiplicity and `j` the interaction
/// count, so the full evaluated weight is
/// `integer_coeff * n^{2t-f} (i m)^f e^{i j chi}` stored in `coeff`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorTerm {
    pub labels: (BinLabel, BinLabel),
    pub j: u64,
    pub integer_coeff: i64,
    pub coeff: Complex64,
}

impl OperatorTerm {
    pub fn new(
        labels: (BinLabel, BinLabel),
        j: u64,
        integer_coeff: i64,
        f: u64,
        t: u64,
        params: &WalkParams,
    ) -> OperatorTerm {
        OperatorTerm {
            labels,
            j,
            integer_coeff,
            coeff: evaluated_weight(integer_coeff, f, j, t, params),
        }
    }
}

/// Numeric weight `c * n^{2t-f} (i m)^f e^{i j chi}`.
fn evaluated_weight(c: i64, f: u64, j: u64, t: u64, params: &WalkParams) -> Complex64 {
    let i_pow = match f % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let magnitude = params.m().powi(f as i32) * params.n().powi((2 * t - f) as i32);
    i_pow * Complex64::from_polar(1.0, params.chi() * j as f64) * magnitude * c as f64
}

/// Deterministic trajectory that transports every step except at the
/// listed flip steps (1-based). Returns per-time positions and states,
/// both of length `t + 1`.
fn flip_at_path(x_in: i64, a: Bit, t: u64, flips: &[u64]) -> (Vec<i64>, Vec<Bit>) {
    let mut pos = Vec::with_capacity(t as usize + 1);
    let mut bits = Vec::with_capacity(t as usize + 1);
    pos.push(x_in);
    bits.push(a);
    for step in 1..=t {
        let prev = *bits.last().expect("nonempty");
        if flips.contains(&step) {
            pos.push(*pos.last().expect("nonempty"));
            bits.push(prev ^ 1);
        } else {
            let dir = if prev == 0 { 1 } else { -1 };
            pos.push(pos.last().expect("nonempty") + dir);
            bits.push(prev);
        }
    }
    (pos, bits)
}

/// Deterministic trajectory that flips every step except at the listed
/// transport steps (1-based).
fn transport_at_path(x_in: i64, a: Bit, t: u64, transports: &[u64]) -> (Vec<i64>, Vec<Bit>) {
    let mut pos = Vec::with_capacity(t as usize + 1);
    let mut bits = Vec::with_capacity(t as usize + 1);
    pos.push(x_in);
    bits.push(a);
    for step in 1..=t {
        let prev = *bits.last().expect("nonempty");
        if transports.contains(&step) {
            let dir = if prev == 0 { 1 } else { -1 };
            pos.push(pos.last().expect("nonempty") + dir);
            bits.push(prev);
        } else {
            pos.push(*pos.last().expect("nonempty"));
            bits.push(prev ^ 1);
        }
    }
    (pos, bits)
}

/// Shared-site opposite-state steps between two trajectories, over the
/// coupling times `0..t-1`.
fn count_encounters(pa: &(Vec<i64>, Vec<Bit>), pb: &(Vec<i64>, Vec<Bit>), t: u64) -> u64 {
    (0..t as usize)
        .filter(|&tau| pa.0[tau] == pb.0[tau] && pa.1[tau] != pb.1[tau])
        .count() as u64
}

/// Closed-form terms for the implemented low-order classes: `(0, f)`
/// and `(f, 0)` with `f <= 3`, `(1, 1)`, and `(1, 2)` / `(2, 1)`.
pub fn lowmass_terms(class: &DiagramClass, params: &WalkParams) -> Result<Vec<OperatorTerm>> {
    if class.regime != Regime::LowMass {
        return Err(Error::UnsupportedClass(format!(
            "total flip count {} exceeds the closed low-order forms",
            class.f()
        )));
    }
    match (class.f1, class.f2) {
        (0, _) => light_versus(class, 1, params),
        (_, 0) => light_versus(class, 2, params),
        (1, 1) => Ok(one_one_terms(class, params)),
        (1, 2) | (2, 1) => one_two_terms(class, params),
        _ => Err(Error::UnsupportedClass(format!(
            "no closed form for class ({}, {})",
            class.f1, class.f2
        ))),
    }
}

/// Classes where one slot is unflipped (a light ray). The ray direction
/// is forced by its boundary, the other walker's initial state by the
/// encounter parity, and the crossing condition on the boundary data
/// decides between exactly one interaction and none.
fn light_versus(
    class: &DiagramClass,
    light_slot: usize,
    params: &WalkParams,
) -> Result<Vec<OperatorTerm>> {
    let t = class.t;
    if t == 0 {
        return Ok(Vec::new());
    }
    let (lx_in, lx_out, ox_in, ox_out, f_o) = if light_slot == 1 {
        (class.x_in, class.x_out, class.y_in, class.y_out, class.f2)
    } else {
        (class.y_in, class.y_out, class.x_in, class.x_out, class.f1)
    };
    let d = lx_out - lx_in;
    if d.unsigned_abs() != t {
        return Err(Error::Domain(format!(
            "unflipped slot must traverse {t} sites, got displacement {d}"
        )));
    }
    let a_l: Bit = if d > 0 { 0 } else { 1 };
    let a_o: Bit = ((1 + lx_in + ox_in + a_l as i64).rem_euclid(2)) as Bit;
    let b_o = a_o ^ (f_o % 2) as Bit;
    let g_in = ox_in - lx_in;
    let g_out = ox_out - lx_out;
    let crosses = if a_l == 0 {
        g_in >= 0 && g_out < 0
    } else {
        g_in <= 0 && g_out > 0
    };
    if !crosses {
        return Ok(Vec::new());
    }
    let c = path_count_c(b_o, a_o, f_o, ox_in, ox_out, t);
    if c == 0 {
        return Ok(Vec::new());
    }
    let light = BinLabel::new(a_l, a_l);
    let other = BinLabel::new(b_o, a_o);
    let labels = if light_slot == 1 { (light, other) } else { (other, light) };
    Ok(vec![OperatorTerm::new(labels, 1, c, class.f(), t, params)])
}

/// The `(1, 1)` class: both trajectories are unique once their initial
/// states are fixed, so the interaction count is read off directly.
fn one_one_terms(class: &DiagramClass, params: &WalkParams) -> Vec<OperatorTerm> {
    let t = class.t;
    let mut out = Vec::new();
    for a1 in 0..=1u8 {
        let p1 = match unique_single_flip(class.x_in, class.x_out, a1, t) {
            Some(p) => p,
            None => continue,
        };
        for a2 in 0..=1u8 {
            let p2 = match unique_single_flip(class.y_in, class.y_out, a2, t) {
                Some(p) => p,
                None => continue,
            };
            let j = count_encounters(&p1, &p2, t);
            if j == 0 {
                continue;
            }
            let labels = (BinLabel::new(a1 ^ 1, a1), BinLabel::new(a2 ^ 1, a2));
            out.push(OperatorTerm::new(labels, j, 1, 2, t, params));
        }
    }
    out.sort_by_key(|term| (term.labels, term.j));
    out
}

/// The single trajectory with one flip between the given boundaries,
/// if the initial state admits one.
fn unique_single_flip(x_in: i64, x_out: i64, a: Bit, t: u64) -> Option<(Vec<i64>, Vec<Bit>)> {
    let d_a: i64 = if a == 0 { 1 } else { -1 };
    let num = t as i64 + 1 + (x_out - x_in) * d_a;
    if num % 2 != 0 {
        return None;
    }
    let s = num / 2;
    if s < 1 || s > t as i64 {
        return None;
    }
    Some(flip_at_path(x_in, a, t, &[s as u64]))
}

/// The `(1, 2)` and `(2, 1)` classes via the closed bracket
/// expressions. With an ordering swap both wedge sectors of the
/// single-flip walker sweep the partner once and contribute the full
/// double-flip multiplicity; without one, only the sector pointing at
/// the partner contributes, reduced by half the relative displacement
/// at whichever end the double-flip walker moves toward its partner.
fn one_two_terms(class: &DiagramClass, params: &WalkParams) -> Result<Vec<OperatorTerm>> {
    if class.x_in == class.y_in || class.x_out == class.y_out {
        return Err(Error::UnsupportedClass(
            "coincident boundary sites fall outside the closed (1,2) forms".into(),
        ));
    }
    if class.x_in > class.y_in {
        // Normalize to slot 1 starting lower; swapping distinguishable
        // slots swaps the class split and the emitted labels.
        let swapped = DiagramClass::new(
            class.f2,
            class.f1,
            class.y_in,
            class.x_in,
            class.y_out,
            class.x_out,
            class.t,
        )?;
        return Ok(one_two_terms(&swapped, params)?
            .into_iter()
            .map(|term| OperatorTerm {
                labels: (term.labels.1, term.labels.0),
                ..term
            })
            .collect());
    }
    let t = class.t;
    let order_flips = class.x_out > class.y_out;
    let single_slot = if class.f1 == 1 { 1 } else { 2 };
    let (sx_in, sx_out, ox_in, ox_out) = if single_slot == 1 {
        (class.x_in, class.x_out, class.y_in, class.y_out)
    } else {
        (class.y_in, class.y_out, class.x_in, class.x_out)
    };
    let sd = sx_out - sx_in;
    // Wedge of the single-flip walker opens toward its partner; the
    // flipped initial bit gives the valley-shaped companion diagram.
    let a_peak: Bit = if single_slot == 1 { 0 } else { 1 };
    let mut terms = Vec::new();
    for a_s in [a_peak, a_peak ^ 1] {
        let dir: i64 = if a_s == 0 { 1 } else { -1 };
        let num = t as i64 + 1 + sd * dir;
        if num % 2 != 0 {
            continue;
        }
        let s = num / 2;
        if !(1..=t as i64).contains(&s) {
            continue;
        }
        let a_o: Bit = ((1 + sx_in + ox_in + a_s as i64).rem_euclid(2)) as Bit;
        let single_label = BinLabel::new(a_s ^ 1, a_s);
        let double_label = BinLabel::new(a_o, a_o);
        let labels = if single_slot == 1 {
            (single_label, double_label)
        } else {
            (double_label, single_label)
        };
        let c = path_count_c(a_o, a_o, 2, ox_in, ox_out, t);
        if order_flips {
            // Odd parity: the ordering swap forces exactly one meeting
            // on every double-flip trajectory, in either wedge sector.
            if c != 0 {
                terms.push(OperatorTerm::new(labels, 1, c, 3, t, params));
            }
            continue;
        }
        // Even parity pairs two meetings on the outgoing and returning
        // legs of the wedge, so only the sector pointing at the partner
        // contributes, and only when the gap can close before the flip
        // (moving toward) or reopen after it (moving away).
        if a_s != a_peak {
            continue;
        }
        let toward = (a_o == 0) == (ox_in < sx_in);
        let delta = if toward { class.delta_in } else { class.delta_out };
        if delta.rem_euclid(2) != 0 {
            continue;
        }
        let room = if toward { s - 1 } else { t as i64 - s };
        if delta.abs() / 2 > room {
            continue;
        }
        let bracket = c - delta.abs() / 2;
        if bracket > 0 {
            terms.push(OperatorTerm::new(labels, 2, bracket, 3, t, params));
        }
    }
    Ok(terms)
}

/// Closed-form terms for the top of the flip hierarchy, `f` in
/// `{2t, 2t-1, 2t-2}` at even `t`: walkers flip at almost every step
/// and interactions accumulate along shared standing segments.
pub fn highmass_terms(class: &DiagramClass, params: &WalkParams) -> Result<Vec<OperatorTerm>> {
    let t = class.t;
    let f = class.f();
    if class.regime != Regime::HighMass {
        return Err(Error::UnsupportedClass(format!(
            "total flip count {f} is below the closed high-order forms for {t} steps"
        )));
    }
    if !t.is_multiple_of(2) {
        return Err(Error::UnsupportedClass(
            "high-order closed forms are stated for even step counts only".into(),
        ));
    }
    if class.delta_in.abs() + class.delta_out.abs() != (2 * t - f) as i64 {
        return Err(Error::UnsupportedClass(format!(
            "boundary displacements {} and {} do not place ({}, {}) in a transport-counting subclass",
            class.delta_in, class.delta_out, class.f1, class.f2
        )));
    }
    let transports_1 = (t - class.f1) as usize;
    let transports_2 = (t - class.f2) as usize;
    type LabelBits = (Bit, Bit, Bit, Bit);
    let mut counts: BTreeMap<(LabelBits, u64), i64> = BTreeMap::new();
    for a1 in 0..=1u8 {
        for a2 in 0..=1u8 {
            for ts1 in transport_step_choices(t, transports_1) {
                let p1 = transport_at_path(class.x_in, a1, t, &ts1);
                if *p1.0.last().expect("nonempty") != class.x_out {
                    continue;
                }
                for ts2 in transport_step_choices(t, transports_2) {
                    let p2 = transport_at_path(class.y_in, a2, t, &ts2);
                    if *p2.0.last().expect("nonempty") != class.y_out {
                        continue;
                    }
                    let j = count_encounters(&p1, &p2, t);
                    if j == 0 {
                        continue;
                    }
                    let b1 = *p1.1.last().expect("nonempty");
                    let b2 = *p2.1.last().expect("nonempty");
                    *counts.entry(((b1, a1, b2, a2), j)).or_insert(0) += 1;
                }
            }
        }
    }
    Ok(counts
        .into_iter()
        .map(|(((b1, a1, b2, a2), j), c)| {
            OperatorTerm::new(
                (BinLabel::new(b1, a1), BinLabel::new(b2, a2)),
                j,
                c,
                f,
                t,
                params,
            )
        })
        .collect())
}

/// All ways to place up to two transport steps among `t` steps; the
/// closed high-order forms never need more.
fn transport_step_choices(t: u64, transports: usize) -> Vec<Vec<u64>> {
    match transports {
        0 => vec![Vec::new()],
        1 => (1..=t).map(|s| vec![s]).collect(),
        2 => {
            let mut out = Vec::new();
            for s1 in 1..=t {
                for s2 in (s1 + 1)..=t {
                    out.push(vec![s1, s2]);
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Reflection axis for diagram symmetries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Spatial mirror: sites negate and the walkers trade slots.
    Vertical,
    /// Time reversal: initial and final data trade places.
    Horizontal,
}

/// Whether the diagram's strict relative order flips between the ends.
/// Time reversal of an order-changing diagram also trades the slots, so
/// the label rule differs between the two families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    OrderChanging,
    OrderPreserving,
}

/// Label transformation of a term under a diagram reflection. The
/// interaction count and multiplicity are invariant; only the matrix
/// units move. Involutive for every axis and family.
pub fn reflect(term: &OperatorTerm, axis: Axis, family: Family) -> OperatorTerm {
    let (l1, l2) = term.labels;
    let labels = match (axis, family) {
        (Axis::Vertical, _) => (l2.barred(), l1.barred()),
        (Axis::Horizontal, Family::OrderChanging) => {
            (l2.transposed().barred(), l1.transposed().barred())
        }
        (Axis::Horizontal, Family::OrderPreserving) => {
            (l1.transposed().barred(), l2.transposed().barred())
        }
    };
    OperatorTerm { labels, ..*term }
}
