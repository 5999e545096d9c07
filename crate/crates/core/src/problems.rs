//! Pseudo-Boolean benchmark problems: fitness functions, known optima,
//! instance features, and the built-in training sets.
//!
//! All four problems are maximization problems over bitstrings of length
//! `n`. `OneMax`, `BinValue` and `LeadingOnes` expose the single feature
//! `n`; `Jump` additionally exposes the jump width `m`.
//!
//! `BinValue` fitness is represented as a double, so for `n > 53` only the
//! leading ~52 significant bits distinguish values; ranking is dominated by
//! the high-order bits, which is exactly the regime the problem is meant to
//! probe (setting the first bit already secures half the optimal fitness).

use alloc::vec::Vec;
use core::fmt;
use rand::Rng;

use crate::expr::FeatureEnv;
use crate::rng::RandomStream;

/// The built-in problem families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProblemKind {
    OneMax,
    BinValue,
    LeadingOnes,
    Jump,
}

impl ProblemKind {
    /// Stable lower-case name used by configuration files and the CLI.
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::OneMax => "onemax",
            ProblemKind::BinValue => "binvalue",
            ProblemKind::LeadingOnes => "leadingones",
            ProblemKind::Jump => "jump",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "onemax" => Some(ProblemKind::OneMax),
            "binvalue" => Some(ProblemKind::BinValue),
            "leadingones" => Some(ProblemKind::LeadingOnes),
            "jump" => Some(ProblemKind::Jump),
            _ => None,
        }
    }

    /// Feature names instances of this problem expose, in sorted order.
    pub fn feature_names(self) -> &'static [&'static str] {
        match self {
            ProblemKind::Jump => &["m", "n"],
            _ => &["n"],
        }
    }

    pub fn all() -> [ProblemKind; 4] {
        [
            ProblemKind::OneMax,
            ProblemKind::BinValue,
            ProblemKind::LeadingOnes,
            ProblemKind::Jump,
        ]
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rejected instance description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceError {
    /// `n` must be at least 1.
    BitCountZero,
    /// Jump requires `2 <= m < n`.
    JumpWidthOutOfRange { m: usize, n: usize },
    /// The problem does not take an `m` feature.
    UnexpectedJumpWidth,
    /// Jump requires an `m` feature.
    MissingJumpWidth,
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::BitCountZero => write!(f, "instance bit count n must be >= 1"),
            InstanceError::JumpWidthOutOfRange { m, n } => {
                write!(f, "jump width m={m} out of range (need 2 <= m < n, n={n})")
            }
            InstanceError::UnexpectedJumpWidth => {
                write!(f, "feature m is only valid for jump instances")
            }
            InstanceError::MissingJumpWidth => write!(f, "jump instances need a width feature m"),
        }
    }
}

impl core::error::Error for InstanceError {}

/// One benchmark problem instance: a problem identity plus its feature
/// values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    kind: ProblemKind,
    n: usize,
    m: Option<usize>,
}

impl ProblemInstance {
    /// Builds an instance for a problem with the single feature `n`.
    pub fn new(kind: ProblemKind, n: usize) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::BitCountZero);
        }
        if kind == ProblemKind::Jump {
            return Err(InstanceError::MissingJumpWidth);
        }
        Ok(Self { kind, n, m: None })
    }

    /// Builds a Jump instance with width `m` and `n` bits.
    pub fn jump(m: usize, n: usize) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::BitCountZero);
        }
        if m < 2 || m >= n {
            return Err(InstanceError::JumpWidthOutOfRange { m, n });
        }
        Ok(Self {
            kind: ProblemKind::Jump,
            n,
            m: Some(m),
        })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// Bit count `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Jump width `m`, present only for Jump instances.
    pub fn m(&self) -> Option<usize> {
        self.m
    }

    /// The instance's feature bindings (one row of the feature matrix).
    pub fn features(&self) -> FeatureEnv {
        let mut env = FeatureEnv::new();
        env.bind("n", self.n as f64);
        if let Some(m) = self.m {
            env.bind("m", m as f64);
        }
        env
    }

    /// Evaluates the instance's fitness function.
    pub fn fitness(&self, x: &Bitstring) -> Result<f64, FitnessError> {
        if x.len() != self.n {
            return Err(FitnessError::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(match self.kind {
            ProblemKind::OneMax => x.count_ones() as f64,
            ProblemKind::LeadingOnes => x.leading_ones() as f64,
            ProblemKind::BinValue => x.binary_value(),
            ProblemKind::Jump => {
                jump_fitness(self.m.expect("jump instances carry m"), self.n, x.count_ones())
            }
        })
    }

    /// Fitness given a bitstring whose ones count is already known; lets
    /// the solver loop skip the popcount for the ones-determined problems.
    /// Always agrees with [`ProblemInstance::fitness`].
    pub(crate) fn fitness_from_state(&self, x: &Bitstring, ones: usize) -> f64 {
        match self.kind {
            ProblemKind::OneMax => ones as f64,
            ProblemKind::Jump => {
                jump_fitness(self.m.expect("jump instances carry m"), self.n, ones)
            }
            ProblemKind::LeadingOnes => x.leading_ones() as f64,
            ProblemKind::BinValue => x.binary_value(),
        }
    }

    /// Whether fitness depends on the bitstring only through its ones
    /// count. Such problems are exchangeable under uniform distinct-
    /// position mutation, which admits a faster equivalent search state.
    pub(crate) fn fitness_is_ones_determined(&self) -> bool {
        matches!(self.kind, ProblemKind::OneMax | ProblemKind::Jump)
    }

    /// Fitness as a function of the ones count alone; only valid when
    /// [`Self::fitness_is_ones_determined`] holds.
    pub(crate) fn fitness_from_ones(&self, ones: usize) -> f64 {
        debug_assert!(self.fitness_is_ones_determined());
        match self.kind {
            ProblemKind::OneMax => ones as f64,
            ProblemKind::Jump => {
                jump_fitness(self.m.expect("jump instances carry m"), self.n, ones)
            }
            _ => unreachable!("not ones-determined"),
        }
    }

    /// The best objective value the instance admits.
    pub fn optimum(&self) -> f64 {
        match self.kind {
            ProblemKind::OneMax | ProblemKind::LeadingOnes => self.n as f64,
            // For n > 53 the -1 vanishes in double precision, matching the
            // fitness value of the all-ones string exactly.
            ProblemKind::BinValue => pow2(self.n as i32) - 1.0,
            ProblemKind::Jump => (self.n + self.m.expect("jump instances carry m")) as f64,
        }
    }
}

impl fmt::Display for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.m {
            Some(m) => write!(f, "{}(m={m},n={})", self.kind, self.n),
            None => write!(f, "{}(n={})", self.kind, self.n),
        }
    }
}

/// Fitness of Jump(m, n) as a function of the number of ones: the plateau
/// `m + |x|` outside the gap, the valley `n - |x|` inside it.
fn jump_fitness(m: usize, n: usize, ones: usize) -> f64 {
    if ones <= n - m || ones == n {
        (m + ones) as f64
    } else {
        (n - ones) as f64
    }
}

/// 2^exp as an exact double (exp within the double exponent range).
fn pow2(exp: i32) -> f64 {
    libm::scalbn(1.0, exp)
}

/// Fitness evaluation failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FitnessError {
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for FitnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitnessError::LengthMismatch { expected, got } => {
                write!(f, "bitstring length {got} does not match instance n={expected}")
            }
        }
    }
}

impl core::error::Error for FitnessError {}

/// The built-in training set for a problem: `n` in
/// {10, 20, 50, 100, 200, 500} for the single-feature problems, and the
/// twelve `(m, n)` pairs for Jump.
pub fn training_set(kind: ProblemKind) -> Vec<ProblemInstance> {
    const SIZES: [usize; 6] = [10, 20, 50, 100, 200, 500];
    const JUMP_PAIRS: [(usize, usize); 12] = [
        (2, 10),
        (3, 10),
        (4, 10),
        (5, 10),
        (2, 20),
        (3, 20),
        (4, 20),
        (2, 50),
        (3, 50),
        (2, 100),
        (3, 100),
        (2, 200),
    ];
    match kind {
        ProblemKind::Jump => JUMP_PAIRS
            .iter()
            .map(|&(m, n)| ProblemInstance::jump(m, n).expect("built-in pairs are valid"))
            .collect(),
        _ => SIZES
            .iter()
            .map(|&n| ProblemInstance::new(kind, n).expect("built-in sizes are valid"))
            .collect(),
    }
}

/// A fixed-length bitstring stored as packed 64-bit words.
///
/// Bit `i` (zero-based) lives at word `i / 64`, position `i % 64` from the
/// least significant end; unused high bits of the last word are always
/// zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitstring {
    words: Vec<u64>,
    len: usize,
}

impl Bitstring {
    pub fn zeroes(len: usize) -> Self {
        Self {
            words: alloc::vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self::zeroes(len);
        for w in &mut s.words {
            *w = u64::MAX;
        }
        s.mask_tail();
        s
    }

    /// Uniformly random bitstring.
    pub fn random(len: usize, rng: &mut RandomStream) -> Self {
        let mut s = Self::zeroes(len);
        for w in &mut s.words {
            *w = rng.random();
        }
        s.mask_tail();
        s
    }

    /// Builds from boolean values, most significant (first) bit first.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = Self::zeroes(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                s.set(i, true);
            }
        }
        s
    }

    /// Parses a `"10110"`-style literal (handy in tests and fixtures).
    pub fn from_literal(text: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(Self::from_bits(&bits))
    }

    fn mask_tail(&mut self) {
        let used = self.len % 64;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Flips bit `i` and reports its new value.
    pub fn flip(&mut self, i: usize) -> bool {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        self.words[i / 64] ^= mask;
        self.words[i / 64] & mask != 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Length of the maximal all-ones prefix.
    pub fn leading_ones(&self) -> usize {
        let mut prefix = 0usize;
        for &w in self.words.iter() {
            if w == u64::MAX {
                prefix += 64;
                continue;
            }
            // Unused tail bits are zero, so an unaligned final word stops
            // the count at the string length by itself.
            prefix += w.trailing_ones() as usize;
            break;
        }
        prefix.min(self.len)
    }

    /// The bitstring value read as a binary number with the first bit as
    /// the most significant digit, in double precision. Words are
    /// accumulated most-significant-first; this order is part of the
    /// representation contract.
    pub fn binary_value(&self) -> f64 {
        let n = self.len as i32;
        let mut value = 0.0f64;
        for (j, &w) in self.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            // Bit (64j + b) has weight 2^(n - 1 - 64j - b); reversing the
            // word turns the sum over set bits into one integer-to-double
            // conversion.
            let scaled = w.reverse_bits() as f64;
            value += libm::scalbn(scaled, n - 1 - 64 * j as i32 - 63);
        }
        value
    }

    /// Pointwise complement.
    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.mask_tail();
        out
    }

    /// Hamming distance to another bitstring of the same length.
    pub fn hamming_distance(&self, other: &Self) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }
}
