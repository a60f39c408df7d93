//! Chirality bits, stretch letters, walk trajectories, and the graded
//! integer amplitudes that organize every combinatorial count in the crate.
//!
//! A single walker carries one bit of internal state: bit 0 moves one site
//! right per step, bit 1 moves one site left. A trajectory over `t` steps is
//! a string of `t + 1` bits; each adjacent pair maps to a stretch letter
//! (`R` for 00, `L` for 11, `F` for a flip), and the letter sequence fixes
//! the spatial displacement. Matrix units `W_ab` (1 in row `a`, column `b`
//! of a 2x2 matrix) track the endpoint bits of a trajectory under
//! composition: a product of per-step units collapses to the unit indexed by
//! the final and initial bits.
//!
//! Amplitudes of individual trajectories are monomials `(i m)^f n^(S - f)`
//! with `f` the flip count and `S` the total number of steps; interacting
//! evolutions additionally pick up integer powers of a unit phase.
//! [`GradedAmplitude`] stores integer counts per `(f, j)` pair so that exact
//! combinatorial identities can be checked without floating point, and
//! evaluates to a complex number only on demand.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Internal state of a walker; 0 moves right, 1 moves left.
pub type Bit = u8;

/// Walker internal state as a named direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Chirality {
    /// Right mover, bit 0.
    R,
    /// Left mover, bit 1.
    L,
}

impl Chirality {
    pub fn bit(self) -> Bit {
        match self {
            Chirality::R => 0,
            Chirality::L => 1,
        }
    }

    pub fn from_bit(bit: Bit) -> Chirality {
        assert!(bit <= 1, "chirality bit must be 0 or 1, got {bit}");
        if bit == 0 {
            Chirality::R
        } else {
            Chirality::L
        }
    }

    pub fn flipped(self) -> Chirality {
        match self {
            Chirality::R => Chirality::L,
            Chirality::L => Chirality::R,
        }
    }
}

impl fmt::Display for Chirality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chirality::R => write!(f, "R"),
            Chirality::L => write!(f, "L"),
        }
    }
}

impl FromStr for Chirality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Chirality> {
        match s {
            "R" => Ok(Chirality::R),
            "L" => Ok(Chirality::L),
            other => Err(Error::InvalidParameter(format!(
                "chirality must be R or L, got {other:?}"
            ))),
        }
    }
}

/// Validated single-step parameters: mass couple `(m, n)` with
/// `m^2 + n^2 = 1` and the pair-interaction phase angle `chi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkParams {
    m: f64,
    n: f64,
    chi: f64,
}

impl WalkParams {
    /// Generic parameter set with `0 < m < 1` and `chi` in `[-pi, pi]`.
    pub fn new(mass: f64, chi: f64) -> Result<WalkParams> {
        if !mass.is_finite() || mass <= 0.0 || mass >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "mass amplitude must lie strictly between 0 and 1, got {mass}"
            )));
        }
        if !chi.is_finite() || !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&chi) {
            return Err(Error::InvalidParameter(format!(
                "interaction angle must lie in [-pi, pi], got {chi}"
            )));
        }
        Ok(WalkParams {
            m: mass,
            n: (1.0 - mass * mass).sqrt(),
            chi,
        })
    }

    /// Limit `m = 0`: pure transport, bits never flip.
    pub fn massless(chi: f64) -> Result<WalkParams> {
        let mut p = WalkParams::new(0.5, chi)?;
        p.m = 0.0;
        p.n = 1.0;
        Ok(p)
    }

    /// Limit `m = 1`: no transport, bits flip every step.
    pub fn unit_mass(chi: f64) -> Result<WalkParams> {
        let mut p = WalkParams::new(0.5, chi)?;
        p.m = 1.0;
        p.n = 0.0;
        Ok(p)
    }

    /// Flip (mass) amplitude per step.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Transport amplitude per step, `sqrt(1 - m^2)`.
    pub fn n(&self) -> f64 {
        self.n
    }

    /// Phase angle applied per doubly occupied site and step.
    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Phase factor `e^(i chi)`.
    pub fn interaction_phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.chi)
    }
}

/// Matrix unit `W_ab`: the 2x2 matrix with a single 1 in row `a`
/// (final bit), column `b` (initial bit).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinLabel {
    /// Row index: bit at the later time.
    pub out_bit: Bit,
    /// Column index: bit at the earlier time.
    pub in_bit: Bit,
}

impl BinLabel {
    pub fn new(out_bit: Bit, in_bit: Bit) -> BinLabel {
        assert!(out_bit <= 1 && in_bit <= 1, "matrix unit bits must be 0 or 1");
        BinLabel { out_bit, in_bit }
    }

    /// Entry at `(row, col)`: 1 for the labelled position, else 0.
    pub fn entry(self, row: Bit, col: Bit) -> f64 {
        if row == self.out_bit && col == self.in_bit {
            1.0
        } else {
            0.0
        }
    }

    /// Swaps the roles of initial and final bit.
    pub fn transposed(self) -> BinLabel {
        BinLabel::new(self.in_bit, self.out_bit)
    }

    /// Complements both bits.
    pub fn barred(self) -> BinLabel {
        BinLabel::new(1 - self.out_bit, 1 - self.in_bit)
    }

    /// `W00`, `W01`, `W10`, or `W11`.
    pub fn name(self) -> String {
        format!("W{}{}", self.out_bit, self.in_bit)
    }
}

impl fmt::Display for BinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W{}{}", self.out_bit, self.in_bit)
    }
}

impl FromStr for BinLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<BinLabel> {
        let bits = s.strip_prefix('W').ok_or_else(|| {
            Error::InvalidParameter(format!("matrix unit must look like W01, got {s:?}"))
        })?;
        let mut it = bits.chars();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "matrix unit must have exactly two bits, got {s:?}"
                )))
            }
        };
        let parse_bit = |c: char| -> Result<Bit> {
            match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter(format!(
                    "matrix unit bits must be 0 or 1, got {other:?}"
                ))),
            }
        };
        Ok(BinLabel::new(parse_bit(a)?, parse_bit(b)?))
    }
}

/// Matrix product `x * y` of two units: `W_ab W_cd = delta_bc W_ad`.
///
/// Returns `None` when the inner bits mismatch and the product vanishes.
pub fn compose_binary(x: BinLabel, y: BinLabel) -> Option<BinLabel> {
    if x.in_bit == y.out_bit {
        Some(BinLabel::new(x.out_bit, y.in_bit))
    } else {
        None
    }
}

/// Stretch letter between two consecutive bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    /// Two right bits in a row: move right.
    R,
    /// Two left bits in a row: move left.
    L,
    /// A bit flip: stand still for one step.
    F,
}

impl Letter {
    /// Spatial displacement carried by one step of this letter.
    pub fn displacement(self) -> i64 {
        match self {
            Letter::R => 1,
            Letter::L => -1,
            Letter::F => 0,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::R => write!(f, "R"),
            Letter::L => write!(f, "L"),
            Letter::F => write!(f, "F"),
        }
    }
}

/// Letter generated by the ordered bit pair `(prev, next)`.
pub fn letter_of_bits(prev: Bit, next: Bit) -> Letter {
    match (prev, next) {
        (0, 0) => Letter::R,
        (1, 1) => Letter::L,
        _ => Letter::F,
    }
}

/// Free displacement of one step given the letter.
pub fn displacement(letter: Letter) -> i64 {
    letter.displacement()
}

/// A walker trajectory: a starting site plus the bit at every time
/// `0..=t`. Always holds at least one bit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitPath {
    origin: i64,
    bits: Vec<Bit>,
}

impl BitPath {
    pub fn new(origin: i64, bits: Vec<Bit>) -> Result<BitPath> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter(
                "a trajectory needs at least the time-zero bit".into(),
            ));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "trajectory bits must be 0 or 1, got {bad}"
            )));
        }
        Ok(BitPath { origin, bits })
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn bits(&self) -> &[Bit] {
        &self.bits
    }

    /// Number of time steps, one less than the number of bits.
    pub fn steps(&self) -> u64 {
        (self.bits.len() - 1) as u64
    }

    pub fn initial_bit(&self) -> Bit {
        self.bits[0]
    }

    pub fn final_bit(&self) -> Bit {
        *self.bits.last().unwrap()
    }

    /// Number of 1 bits, counting both endpoints.
    pub fn weight(&self) -> u64 {
        self.bits.iter().map(|&b| u64::from(b)).sum()
    }

    /// Number of bit flips, i.e. `F` letters.
    pub fn flips(&self) -> u64 {
        self.bits.windows(2).filter(|w| w[0] != w[1]).count() as u64
    }

    /// Site occupied at each time `0..=t`.
    pub fn positions(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.bits.len());
        let mut x = self.origin;
        out.push(x);
        for w in self.bits.windows(2) {
            x += letter_of_bits(w[0], w[1]).displacement();
            out.push(x);
        }
        out
    }

    /// Site occupied after the last step.
    pub fn endpoint(&self) -> i64 {
        *self.positions().last().unwrap()
    }

    /// Letter sequence of the trajectory; empty for a single bit.
    pub fn transitions(&self) -> TransitionPath {
        let letters = self
            .bits
            .windows(2)
            .map(|w| letter_of_bits(w[0], w[1]))
            .collect();
        TransitionPath { letters }
    }
}

/// A letter sequence that arises from some bit trajectory.
///
/// Transport letters pin the walker bit on both sides and a flip toggles
/// it, so a sequence is realizable exactly when no transport letter
/// contradicts the propagated bit. Equivalently: after cancelling
/// adjacent flip pairs (two flips restore the bit), the sequence avoids
/// the irreducible obstructions `RL`, `LR`, `RFR`, `LFL`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionPath {
    letters: Vec<Letter>,
}

impl TransitionPath {
    pub fn new(letters: Vec<Letter>) -> Result<TransitionPath> {
        if !Self::letters_realizable(&letters) {
            return Err(Error::Domain(
                "letter sequence reduces to a forbidden substring (RL, LR, RFR, LFL)".into(),
            ));
        }
        Ok(TransitionPath { letters })
    }

    /// Realizability by direct bit propagation.
    pub fn letters_realizable(letters: &[Letter]) -> bool {
        // possible[b]: the bit before the next letter could be b.
        let mut possible = [true, true];
        for &l in letters {
            match l {
                Letter::R => {
                    if !possible[0] {
                        return false;
                    }
                    possible = [true, false];
                }
                Letter::L => {
                    if !possible[1] {
                        return false;
                    }
                    possible = [false, true];
                }
                Letter::F => possible = [possible[1], possible[0]],
            }
        }
        true
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Net displacement of the whole sequence.
    pub fn displacement(&self) -> i64 {
        self.letters.iter().map(|l| l.displacement()).sum()
    }

    /// All bit trajectories from `origin` that generate this sequence.
    ///
    /// A sequence containing any transport letter has exactly one preimage;
    /// an all-flip sequence has two, one per starting bit.
    pub fn bit_preimages(&self, origin: i64) -> Vec<BitPath> {
        let mut out = Vec::new();
        'start: for b0 in 0..=1u8 {
            let mut bits = Vec::with_capacity(self.letters.len() + 1);
            bits.push(b0);
            let mut prev = b0;
            for &l in &self.letters {
                let next = match l {
                    Letter::R => {
                        if prev != 0 {
                            continue 'start;
                        }
                        0
                    }
                    Letter::L => {
                        if prev != 1 {
                            continue 'start;
                        }
                        1
                    }
                    Letter::F => 1 - prev,
                };
                bits.push(next);
                prev = next;
            }
            out.push(BitPath { origin, bits });
        }
        out
    }
}

/// Letter sequence of a bit string; needs at least one bit. A single bit
/// yields the empty sequence.
pub fn bits_to_transitions(bits: &[Bit]) -> Result<TransitionPath> {
    if bits.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot read letters from an empty bit string".into(),
        ));
    }
    let letters = bits.windows(2).map(|w| letter_of_bits(w[0], w[1])).collect();
    Ok(TransitionPath { letters })
}

/// The endpoint bit forced by the boundary data of a `t`-step trajectory:
/// `(t + x_in - x_out + b_in) mod 2`. Requires `t >= 1`; at `t = 0` the
/// endpoint bit is the initial bit itself and nothing is forced.
pub fn forced_final_bit(t: u64, x_in: i64, x_out: i64, b_in: Bit) -> Bit {
    assert!(t >= 1, "the endpoint bit is only forced from one step on");
    ((t as i64 + x_in - x_out + i64::from(b_in)).rem_euclid(2)) as Bit
}

/// Binomial coefficient with the extended zero convention: `C(n, k) = 0`
/// whenever `k < 0` or `k > n` (in particular for any negative `n`).
pub fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as i128)
            .expect("binomial overflow")
            / (i as i128 + 1);
    }
    i64::try_from(acc).expect("binomial overflow")
}

/// Binomial coefficient whose arguments are supplied doubled, so that
/// half-integer values can be passed exactly. Returns 0 when either
/// argument is not an integer, extending the zero convention of [`binom`].
pub fn binom_halves(n2: i64, k2: i64) -> i64 {
    if n2.rem_euclid(2) != 0 || k2.rem_euclid(2) != 0 {
        return 0;
    }
    binom(n2 / 2, k2 / 2)
}

/// Exact amplitude bookkeeping for a fixed total number of steps.
///
/// A term `(f, j) -> c` stands for `c * (i m)^f * n^(S - f) * e^(i j chi)`
/// where `S` is the total letter count; `c` is the integer number of
/// contributing configurations. The zero amplitude is the empty term map
/// and is compatible with any letter count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedAmplitude {
    letters: u64,
    terms: BTreeMap<(u64, u64), i64>,
}

impl Default for GradedAmplitude {
    /// The zero amplitude with no letters; absorbed by any addition.
    fn default() -> Self {
        GradedAmplitude::zero(0)
    }
}

impl GradedAmplitude {
    /// Zero amplitude over `letters` steps.
    pub fn zero(letters: u64) -> GradedAmplitude {
        GradedAmplitude {
            letters,
            terms: BTreeMap::new(),
        }
    }

    /// The amplitude of the empty evolution: one configuration, no letters.
    pub fn one() -> GradedAmplitude {
        GradedAmplitude::from_term(0, 0, 0, 1)
    }

    /// Single term `coeff * (i m)^f * n^(letters - f) * e^(i j chi)`.
    pub fn from_term(letters: u64, f: u64, j: u64, coeff: i64) -> GradedAmplitude {
        assert!(f <= letters, "mass power cannot exceed the letter count");
        let mut terms = BTreeMap::new();
        if coeff != 0 {
            terms.insert((f, j), coeff);
        }
        GradedAmplitude { letters, terms }
    }

    pub fn letters(&self) -> u64 {
        self.letters
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Integer count attached to mass power `f` and phase power `j`.
    pub fn coeff(&self, f: u64, j: u64) -> i64 {
        self.terms.get(&(f, j)).copied().unwrap_or(0)
    }

    /// Nonzero terms in lexicographic `(f, j)` order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, u64, i64)> + '_ {
        self.terms.iter().map(|(&(f, j), &c)| (f, j, c))
    }

    /// Accumulates `other`; both sides must cover the same letter count,
    /// except that a zero amplitude is absorbed regardless of its tag.
    pub fn add_assign(&mut self, other: &GradedAmplitude) -> Result<()> {
        if other.is_zero() {
            return Ok(());
        }
        if self.is_zero() {
            *self = other.clone();
            return Ok(());
        }
        if self.letters != other.letters {
            return Err(Error::ShapeMismatch(format!(
                "cannot add amplitudes over {} and {} letters",
                self.letters, other.letters
            )));
        }
        for (&key, &c) in &other.terms {
            let slot = self.terms.entry(key).or_insert(0);
            *slot += c;
            if *slot == 0 {
                self.terms.remove(&key);
            }
        }
        Ok(())
    }

    /// Appends one letter to every configuration: `R` and `L` multiply by
    /// `n`, `F` multiplies by `i m`.
    pub fn mul_letter(&mut self, letter: Letter) {
        self.letters += 1;
        if matches!(letter, Letter::F) {
            let old = std::mem::take(&mut self.terms);
            self.terms = old.into_iter().map(|((f, j), c)| ((f + 1, j), c)).collect();
        }
    }

    /// Multiplies by `e^(i chi)` raised to `count`.
    pub fn mul_interaction(&mut self, count: u64) {
        if count == 0 {
            return;
        }
        let old = std::mem::take(&mut self.terms);
        self.terms = old
            .into_iter()
            .map(|((f, j), c)| ((f, j + count), c))
            .collect();
    }

    pub fn negate(&mut self) {
        for c in self.terms.values_mut() {
            *c = -*c;
        }
    }

    pub fn scaled(&self, k: i64) -> GradedAmplitude {
        if k == 0 {
            return GradedAmplitude::zero(self.letters);
        }
        GradedAmplitude {
            letters: self.letters,
            terms: self.terms.iter().map(|(&key, &c)| (key, c * k)).collect(),
        }
    }

    /// Evaluates the amplitude at concrete parameters.
    pub fn eval(&self, params: &WalkParams) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(f, j), &c) in &self.terms {
            let i_pow = match f % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            let magnitude = params.m().powi(f as i32) * params.n().powi((self.letters - f) as i32);
            let phase = Complex64::from_polar(1.0, params.chi() * j as f64);
            acc += i_pow * phase * magnitude * c as f64;
        }
        acc
    }
}
