//! Dirichlet L-functions: evaluation, zeros on the critical line, zero
//! dataset files, and the zero sums feeding the Goldbach decomposition.
//!
//! Zero search is GRH-mode only: the rotated completed L-function is real
//! on the critical line, zeros are bracketed by sign changes on an
//! adaptive grid and refined by bisection. A smooth-count window check
//! guards against missed zeros; on failure the scan retries with a finer
//! grid before reporting the suspect gap.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write as _};
use std::path::{Path, PathBuf};

use crate::accum::ComplexNeumaier;
use crate::chars::{CharacterGroup, DirichletCharacter};
use crate::error::{Error, Result};
use crate::special::{gamma_pair_term, hurwitz_zeta, ln_gamma};

/// Hard ceiling on zero search heights.
pub const MAX_ZERO_HEIGHT: f64 = 1.0e4;

/// Default absolute accuracy target for L evaluations.
pub const DEFAULT_L_TARGET: f64 = 1.0e-12;

/// One nontrivial zero beta + i gamma (stored with gamma > 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZeroSource {
    Computed,
    File(PathBuf),
}

/// Truncated zero list of one primitive character: ordinates gamma > 0
/// sorted ascending; negative ordinates are reconstructed from the
/// conjugate character's list (which coincides with this one for real
/// characters).
#[derive(Debug, Clone)]
pub struct ZeroSet {
    pub modulus: u64,
    pub label: u64,
    zeros: Vec<Zero>,
    truncation: f64,
    pub grh_mode: bool,
    pub source: ZeroSource,
}

/// Smooth zero count for |gamma| <= T of a conductor-q primitive
/// character: (T/pi) log(qT / 2 pi e).
pub fn smooth_count(q: u64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t / PI * (q as f64 * t / (2.0 * PI * std::f64::consts::E)).ln()
}

/// Count-window half width: 0.05 T log(q (T+2)) + 10.
pub fn count_window(q: u64, t: f64) -> f64 {
    0.05 * t * ((q as f64) * (t + 2.0)).ln().max(0.0) + 10.0
}

impl ZeroSet {
    pub fn new(
        modulus: u64,
        label: u64,
        zeros: Vec<Zero>,
        truncation: f64,
        grh_mode: bool,
        source: ZeroSource,
    ) -> Result<Self> {
        let set = Self {
            modulus,
            label,
            zeros,
            truncation,
            grh_mode,
            source,
        };
        set.validate()?;
        Ok(set)
    }

    /// Empty set (T = 0).
    pub fn empty(modulus: u64, label: u64) -> Self {
        Self {
            modulus,
            label,
            zeros: Vec::new(),
            truncation: 0.0,
            grh_mode: true,
            source: ZeroSource::Computed,
        }
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// Structural and count validation.
    pub fn validate(&self) -> Result<()> {
        let reason = |msg: String| Error::ZeroFile {
            path: match &self.source {
                ZeroSource::File(p) => p.display().to_string(),
                ZeroSource::Computed => "<computed>".into(),
            },
            reason: msg,
        };
        for w in self.zeros.windows(2) {
            if w[1].gamma < w[0].gamma {
                return Err(reason(format!(
                    "ordinates out of order: {} after {}",
                    w[1].gamma, w[0].gamma
                )));
            }
        }
        for z in &self.zeros {
            if !(z.beta > 0.0 && z.beta < 1.0) {
                return Err(reason(format!("beta {} outside (0,1)", z.beta)));
            }
            if z.gamma <= 0.0 {
                return Err(reason(format!("ordinate {} not positive", z.gamma)));
            }
            if z.gamma > self.truncation * (1.0 + 1e-12) {
                return Err(reason(format!(
                    "ordinate {} beyond truncation {}",
                    z.gamma, self.truncation
                )));
            }
            if self.grh_mode && z.beta != 0.5 {
                return Err(reason(format!("grh mode but beta = {}", z.beta)));
            }
        }
        self.validate_count()
    }

    /// Smooth-count window check on |gamma| <= T (both signs counted as
    /// 2x the stored positive list).
    pub fn validate_count(&self) -> Result<()> {
        let expected = smooth_count(self.modulus, self.truncation);
        let window = count_window(self.modulus, self.truncation);
        let found = 2 * self.zeros.len();
        if ((found as f64) - expected).abs() <= window {
            return Ok(());
        }
        let (gap_lo, gap_hi) = self.widest_gap();
        Err(Error::ZeroCountMismatch {
            found,
            t: self.truncation,
            expected,
            window,
            gap_lo,
            gap_hi,
        })
    }

    fn widest_gap(&self) -> (f64, f64) {
        let mut lo = 0.0;
        let mut best = (0.0, self.truncation);
        let mut best_len = self.truncation;
        for z in &self.zeros {
            if z.gamma - lo > best_len {
                best_len = z.gamma - lo;
                best = (lo, z.gamma);
            }
            lo = z.gamma;
        }
        if self.truncation - lo > best_len {
            best = (lo, self.truncation);
        }
        best
    }

    /// Zeros with lo < gamma <= hi, as a set truncated at hi (no count
    /// re-validation: slices are analysis views, not datasets).
    pub fn slice(&self, lo: f64, hi: f64) -> Self {
        Self {
            modulus: self.modulus,
            label: self.label,
            zeros: self
                .zeros
                .iter()
                .copied()
                .filter(|z| z.gamma > lo && z.gamma <= hi)
                .collect(),
            truncation: hi.min(self.truncation),
            grh_mode: self.grh_mode,
            source: self.source.clone(),
        }
    }
}

/// Zero dataset text format.
///
/// Header `ZSET1 q=<q> conrey=<label> T=<float> grh=<0|1>`, then one zero
/// per line as `<beta> <gamma>`, gamma > 0 sorted ascending.
pub fn save_zeros(set: &ZeroSet, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "ZSET1 q={} conrey={} T={} grh={}",
        set.modulus,
        set.label,
        set.truncation,
        if set.grh_mode { 1 } else { 0 }
    )
    .expect("string write");
    for z in &set.zeros {
        writeln!(out, "{} {}", z.beta, z.gamma).expect("string write");
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

pub fn load_zeros(path: &Path) -> Result<ZeroSet> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let fail = |msg: String| Error::ZeroFile {
        path: path.display().to_string(),
        reason: msg,
    };
    let header = lines
        .next()
        .ok_or_else(|| fail("empty file".into()))?
        .map_err(Error::Io)?;
    let mut q = None;
    let mut label = None;
    let mut t = None;
    let mut grh = None;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("ZSET1") {
        return Err(fail("missing ZSET1 magic".into()));
    }
    for field in fields {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| fail(format!("malformed header field {field}")))?;
        match k {
            "q" => q = v.parse::<u64>().ok(),
            "conrey" => label = v.parse::<u64>().ok(),
            "T" => t = v.parse::<f64>().ok(),
            "grh" => grh = v.parse::<u8>().ok(),
            _ => return Err(fail(format!("unknown header field {k}"))),
        }
    }
    let (q, label, t, grh) = match (q, label, t, grh) {
        (Some(q), Some(l), Some(t), Some(g)) if g <= 1 => (q, l, t, g == 1),
        _ => return Err(fail("incomplete or malformed header".into())),
    };
    let mut zeros = Vec::new();
    for line in lines {
        let line = line.map_err(Error::Io)?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let beta: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail(format!("bad zero line: {line}")))?;
        let gamma: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail(format!("bad zero line: {line}")))?;
        if parts.next().is_some() {
            return Err(fail(format!("trailing data on zero line: {line}")));
        }
        zeros.push(Zero { beta, gamma });
    }
    ZeroSet::new(q, label, zeros, t, grh, ZeroSource::File(path.to_path_buf()))
}

/// Loads and checks the file against the requested character.
pub fn load_zeros_expecting(path: &Path, q: u64, label: u64) -> Result<ZeroSet> {
    let set = load_zeros(path)?;
    if set.modulus != q || set.label != label {
        return Err(Error::ZeroFile {
            path: path.display().to_string(),
            reason: format!(
                "header is q={} conrey={}, expected q={} conrey={}",
                set.modulus, set.label, q, label
            ),
        });
    }
    Ok(set)
}

/// Canonical dataset file name for a primitive character.
pub fn zero_file_name(conductor: u64, label: u64) -> String {
    format!("zeros_q{}_n{}.zset", conductor, label)
}

// ---------------------------------------------------------------------------
// L-function evaluation
// ---------------------------------------------------------------------------

/// L(s, chi) with the achieved absolute error bound, via q^-s times the
/// character combination of Hurwitz zetas. Works for imprimitive
/// characters as well (the Hurwitz identity needs no primitivity).
pub fn evaluate_l_with_bound(
    chi: &DirichletCharacter,
    s: Complex64,
    target: f64,
) -> Result<(Complex64, f64)> {
    let q = chi.modulus();
    if s.im.abs() > MAX_ZERO_HEIGHT * 1.5 {
        return Err(Error::AccuracyCeiling {
            target,
            bound: f64::INFINITY,
            imag: s.im,
        });
    }
    if s == Complex64::new(1.0, 0.0) {
        if chi.is_principal() {
            return Err(Error::PoleAtOne);
        }
        // Pole parts of the Hurwitz pieces cancel for nonprincipal chi;
        // the finite part is the digamma combination.
        let mut acc = ComplexNeumaier::new();
        for a in 1..=q {
            let w = chi.value(a);
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc.add(-w * crate::special::digamma(a as f64 / q as f64)?);
        }
        return Ok((acc.value() / q as f64, 1e-13 * q as f64));
    }
    let per_term_target = target * (q as f64).powf(s.re - 1.0);
    let mut acc = ComplexNeumaier::new();
    let mut bound = 0.0f64;
    for a in 1..=q {
        let w = chi.value(a);
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        let h = hurwitz_zeta(s, a as f64 / q as f64, per_term_target)?;
        acc.add(w * h.value);
        bound += h.error_bound;
    }
    let scale = (-s * (q as f64).ln()).exp();
    Ok((scale * acc.value(), scale.norm() * bound))
}

/// L(s, chi) at the default accuracy target.
pub fn evaluate_l(chi: &DirichletCharacter, s: Complex64) -> Result<Complex64> {
    Ok(evaluate_l_with_bound(chi, s, DEFAULT_L_TARGET)?.0)
}

/// Evaluator of the rotated completed L-function on the critical line.
///
/// Z(t) = Re[e^{i(arg Gamma-factor - arg(eps)/2)} L(1/2 + it)] is real up
/// to rounding, has the same zeros as L on the line, and carries no
/// exponential factor (|Z| = |L|), so it is safe at heights ~10^3.
pub struct CompletedLine<'a> {
    chi: &'a DirichletCharacter,
    parity: f64,
    /// arg(root number) / 2.
    rot: f64,
    ln_q_pi: f64,
}

impl<'a> CompletedLine<'a> {
    pub fn new(chi: &'a DirichletCharacter) -> Result<Self> {
        if !chi.is_primitive() {
            return Err(Error::InvalidArgument(format!(
                "character {} mod {} is imprimitive; completed line needs the primitive inducer",
                chi.label(),
                chi.modulus()
            )));
        }
        let q = chi.modulus();
        let parity = if chi.is_even() { 0.0 } else { 1.0 };
        // Gauss sum tau(chi) = sum chi(m) e(m/q); |tau| = sqrt(q) for
        // primitive chi (checked as a table sanity condition).
        let mut tau = ComplexNeumaier::new();
        for m in 1..=q {
            let w = chi.value(m);
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            let theta = 2.0 * PI * m as f64 / q as f64;
            tau.add(w * Complex64::new(theta.cos(), theta.sin()));
        }
        let tau = tau.value();
        let sqrt_q = (q as f64).sqrt();
        assert!(
            (tau.norm() - sqrt_q).abs() < 1e-8 * sqrt_q.max(1.0),
            "Gauss sum magnitude {} != sqrt({}) for primitive character",
            tau.norm(),
            q
        );
        let i_pow_a = if parity == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        let eps = tau / (i_pow_a * sqrt_q);
        Ok(Self {
            chi,
            parity,
            rot: eps.arg() / 2.0,
            ln_q_pi: (q as f64 / PI).ln(),
        })
    }

    /// (Z(t), transverse component); the second value is ~0 and is a
    /// diagnostic for the rotation.
    pub fn z_full(&self, t: f64) -> Result<(f64, f64)> {
        let s = Complex64::new(0.5, t);
        let l = evaluate_l(self.chi, s)?;
        let lg = ln_gamma((s + self.parity) / 2.0)?;
        let theta = lg.im + t / 2.0 * self.ln_q_pi - self.rot;
        let rotated = Complex64::from_polar(1.0, theta) * l;
        Ok((rotated.re, rotated.im))
    }

    /// Z(t).
    pub fn z(&self, t: f64) -> Result<f64> {
        Ok(self.z_full(t)?.0)
    }
}

/// Zero search options.
#[derive(Debug, Clone, Copy)]
pub struct ZeroFinderOptions {
    /// Scan step = 1 / (step_divisor * smooth positive-side density);
    /// 10 resolves the closest known pairs below T = 10^3 with margin.
    pub step_divisor: f64,
    /// Bisection stops when the bracket is narrower than this.
    pub bisection_width: f64,
    /// Grid-halving retries after a count-window failure.
    pub retries: u32,
}

impl Default for ZeroFinderOptions {
    fn default() -> Self {
        Self {
            step_divisor: 10.0,
            bisection_width: 1e-10,
            retries: 2,
        }
    }
}

/// Positive-side smooth zero density at height t for conductor q.
fn density_pos(q: u64, t: f64) -> f64 {
    ((q as f64 * t.max(1.0) / (2.0 * PI)).ln() / (2.0 * PI)).max(0.05)
}

/// All zeros 0 < gamma <= t_max of L(s, chi) on the critical line for a
/// primitive chi, bracketed on an adaptive grid and refined by bisection
/// to ~1e-10 in the ordinate.
pub fn find_zeros(
    chi: &DirichletCharacter,
    t_max: f64,
    opts: ZeroFinderOptions,
) -> Result<ZeroSet> {
    if t_max <= 0.0 || t_max > MAX_ZERO_HEIGHT {
        return Err(Error::InvalidArgument(format!(
            "zero search height {} outside (0, {}]",
            t_max, MAX_ZERO_HEIGHT
        )));
    }
    let line = CompletedLine::new(chi)?;
    let mut divisor = opts.step_divisor;
    let mut last_err = None;
    for _ in 0..=opts.retries {
        let set = scan_once(chi, &line, t_max, divisor, opts.bisection_width)?;
        match set.validate_count() {
            Ok(()) => return Ok(set),
            Err(e) => {
                last_err = Some(e);
                divisor *= 2.0;
            }
        }
    }
    Err(last_err.expect("at least one scan attempt"))
}

fn scan_once(
    chi: &DirichletCharacter,
    line: &CompletedLine,
    t_max: f64,
    divisor: f64,
    bisection_width: f64,
) -> Result<ZeroSet> {
    let q = chi.modulus();
    let mut grid = vec![1e-4];
    loop {
        let t = *grid.last().expect("nonempty");
        if t >= t_max {
            break;
        }
        let step = 1.0 / (divisor * density_pos(q, t));
        grid.push((t + step).min(t_max));
    }
    let values: Result<Vec<f64>> = grid.par_iter().map(|&t| line.z(t)).collect();
    let values = values?;

    enum Bracket {
        Exact(f64),
        Interval(f64, f64),
    }
    let mut brackets = Vec::new();
    for k in 0..grid.len() - 1 {
        if values[k] == 0.0 {
            if grid[k] > 1e-4 {
                brackets.push(Bracket::Exact(grid[k]));
            }
        } else if values[k] * values[k + 1] < 0.0 {
            brackets.push(Bracket::Interval(grid[k], grid[k + 1]));
        }
    }
    if let Some(&last) = values.last() {
        if last == 0.0 {
            brackets.push(Bracket::Exact(t_max));
        }
    }

    let ordinates: Result<Vec<f64>> = brackets
        .par_iter()
        .map(|b| match *b {
            Bracket::Exact(t) => Ok(t),
            Bracket::Interval(mut lo, mut hi) => {
                let mut v_lo = line.z(lo)?;
                while hi - lo > bisection_width {
                    let mid = 0.5 * (lo + hi);
                    let v_mid = line.z(mid)?;
                    if v_mid == 0.0 {
                        return Ok(mid);
                    }
                    if v_lo * v_mid < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        v_lo = v_mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        })
        .collect();
    let mut ordinates = ordinates?;
    ordinates.sort_by(|a, b| a.partial_cmp(b).expect("no NaN ordinates"));

    Ok(ZeroSet {
        modulus: q,
        label: chi.label(),
        zeros: ordinates
            .into_iter()
            .map(|gamma| Zero { beta: 0.5, gamma })
            .collect(),
        truncation: t_max,
        grh_mode: true,
        source: ZeroSource::Computed,
    })
}

// ---------------------------------------------------------------------------
// Zero data per modulus
// ---------------------------------------------------------------------------

/// Cross-modulus cache of primitive zero sets keyed by (conductor,
/// label); stores the highest truncation computed so far.
#[derive(Debug, Default)]
pub struct ZeroCache {
    map: HashMap<(u64, u64), ZeroSet>,
}

impl ZeroCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(
        &mut self,
        chi: &DirichletCharacter,
        t: f64,
        opts: ZeroFinderOptions,
    ) -> Result<ZeroSet> {
        let key = (chi.modulus(), chi.label());
        if let Some(set) = self.map.get(&key) {
            if set.truncation() >= t {
                let mut s = set.slice(0.0, t);
                s.truncation = t;
                return Ok(s);
            }
        }
        let set = find_zeros(chi, t, opts)?;
        self.map.insert(key, set.clone());
        Ok(set)
    }

    pub fn insert(&mut self, set: ZeroSet) {
        self.map.insert((set.modulus, set.label), set);
    }
}

/// Zero sets for every character of one modulus at a common truncation.
/// Each label maps to the zeros of its primitive inducer.
#[derive(Debug, Clone)]
pub struct ModulusZeros {
    modulus: u64,
    truncation: f64,
    sets: BTreeMap<u64, ZeroSet>,
}

impl ModulusZeros {
    pub fn from_sets(group: &CharacterGroup, sets: BTreeMap<u64, ZeroSet>) -> Result<Self> {
        let mut truncation = None;
        for chi in group.characters() {
            let set = sets
                .get(&chi.label())
                .ok_or(Error::MissingZeros {
                    modulus: group.modulus(),
                    label: chi.label(),
                })?;
            match truncation {
                None => truncation = Some(set.truncation()),
                Some(t) => {
                    if (t - set.truncation()).abs() > 1e-9 {
                        return Err(Error::MixedTruncation(t, set.truncation()));
                    }
                }
            }
        }
        Ok(Self {
            modulus: group.modulus(),
            truncation: truncation.unwrap_or(0.0),
            sets,
        })
    }

    /// Computes (or pulls from cache) zero sets for all characters mod q.
    pub fn compute(
        group: &CharacterGroup,
        t: f64,
        opts: ZeroFinderOptions,
        cache: &mut ZeroCache,
    ) -> Result<Self> {
        let mut sets = BTreeMap::new();
        for chi in group.characters() {
            let (_, star) = crate::chars::conductor_and_primitive(chi)?;
            let set = cache.get_or_compute(&star, t, opts)?;
            sets.insert(chi.label(), set);
        }
        Self::from_sets(group, sets)
    }

    /// Loads per-character datasets from a directory laid out with
    /// [`zero_file_name`] names (one file per primitive inducer).
    pub fn from_dir(group: &CharacterGroup, dir: &Path) -> Result<Self> {
        let mut sets = BTreeMap::new();
        for chi in group.characters() {
            let path = dir.join(zero_file_name(chi.conductor(), chi.induced_from()));
            let set = load_zeros_expecting(&path, chi.conductor(), chi.induced_from())?;
            sets.insert(chi.label(), set);
        }
        Self::from_sets(group, sets)
    }

    /// Empty sets for every character (T = 0): all zero sums vanish.
    pub fn empty(group: &CharacterGroup) -> Self {
        let sets = group
            .characters()
            .iter()
            .map(|c| {
                (
                    c.label(),
                    ZeroSet::empty(c.conductor(), c.induced_from()),
                )
            })
            .collect();
        Self {
            modulus: group.modulus(),
            truncation: 0.0,
            sets,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn set_for(&self, label: u64) -> Option<&ZeroSet> {
        self.sets.get(&label)
    }

    /// View of the same data truncated to height t.
    pub fn truncated(&self, t: f64) -> Self {
        let sets = self
            .sets
            .iter()
            .map(|(&l, s)| {
                let mut sliced = s.slice(0.0, t);
                sliced.truncation = t;
                (l, sliced)
            })
            .collect();
        Self {
            modulus: self.modulus,
            truncation: t,
            sets,
        }
    }
}

// ---------------------------------------------------------------------------
// Zero sums
// ---------------------------------------------------------------------------

/// Value of a conjugate-paired zero sum plus its imaginary residue
/// diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct PairedSum {
    pub value: f64,
    pub imag_residue: f64,
}

pub(crate) fn check_imag(value: Complex64) -> Result<PairedSum> {
    let limit = 1e-8;
    if value.im.abs() > limit * value.re.abs() && value.im.abs() > 1e-12 {
        return Err(Error::ImaginaryResidue {
            imag: value.im,
            value: value.re,
            limit,
        });
    }
    Ok(PairedSum {
        value: value.re,
        imag_residue: value.im.abs(),
    })
}

/// Iterates the full (both-sign) zero multiset of each character mod q:
/// own positive list plus the mirrored positive list of the conjugate
/// character. `f` receives (character, rho).
pub(crate) fn for_each_zero<F: FnMut(&DirichletCharacter, Complex64)>(
    group: &CharacterGroup,
    zeros: &ModulusZeros,
    mut f: F,
) -> Result<()> {
    for chi in group.characters() {
        let own = zeros.set_for(chi.label()).ok_or(Error::MissingZeros {
            modulus: group.modulus(),
            label: chi.label(),
        })?;
        for z in own.zeros() {
            f(chi, Complex64::new(z.beta, z.gamma));
        }
        let conj_label = group.conjugate_label(chi.label());
        let conj = zeros.set_for(conj_label).ok_or(Error::MissingZeros {
            modulus: group.modulus(),
            label: conj_label,
        })?;
        for z in conj.zeros() {
            f(chi, Complex64::new(z.beta, -z.gamma));
        }
    }
    Ok(())
}

/// H(X, q, a) = -(1/phi(q)) sum over chi of conj(chi)(a) sum over zeros
/// of X^(rho+1) / (rho (rho+1)), truncated at the sets' height and summed
/// over the conjugate-symmetric zero multiset so the value is real.
pub fn zero_sum_h(
    x: f64,
    a: u64,
    group: &CharacterGroup,
    zeros: &ModulusZeros,
) -> Result<PairedSum> {
    let ln_x = x.ln();
    let mut acc = ComplexNeumaier::new();
    for_each_zero(group, zeros, |chi, rho| {
        let w = chi.value_conj(a);
        let term = ((rho + 1.0) * ln_x).exp() / (rho * (rho + 1.0));
        acc.add(w * term);
    })?;
    check_imag(-acc.value() / group.phi() as f64)
}

/// Synthetic exceptional-zero datum: a real zero beta of the L-function
/// of a real non-principal character.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiegelDatum {
    pub modulus: u64,
    pub label: u64,
    pub beta: f64,
}

impl SiegelDatum {
    pub fn new(modulus: u64, label: u64, beta: f64) -> Result<Self> {
        if !(beta > 0.5 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "exceptional zero beta {} outside (1/2, 1)",
                beta
            )));
        }
        Ok(Self {
            modulus,
            label,
            beta,
        })
    }

    /// Checks the referenced character is real and non-principal.
    pub fn validate_against(&self, group: &CharacterGroup) -> Result<()> {
        if group.modulus() != self.modulus {
            return Err(Error::InvalidArgument(format!(
                "exceptional datum is mod {}, group is mod {}",
                self.modulus,
                group.modulus()
            )));
        }
        let chi = group.by_label(self.label).ok_or(Error::BadResidue {
            residue: self.label,
            modulus: self.modulus,
        })?;
        if !chi.is_real() || chi.is_principal() {
            return Err(Error::InvalidArgument(format!(
                "exceptional character {} mod {} must be real and non-principal",
                self.label, self.modulus
            )));
        }
        Ok(())
    }
}

/// Configured zero-free-region exponent B* per modulus (default 1/2).
#[derive(Debug, Clone)]
pub struct ExponentConfig {
    default: f64,
    overrides: BTreeMap<u64, f64>,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        Self {
            default: 0.5,
            overrides: BTreeMap::new(),
        }
    }
}

impl ExponentConfig {
    pub fn with_default(b: f64) -> Result<Self> {
        Self::check(b)?;
        Ok(Self {
            default: b,
            overrides: BTreeMap::new(),
        })
    }

    fn check(b: f64) -> Result<()> {
        if !(0.5..=1.0).contains(&b) {
            return Err(Error::InvalidArgument(format!(
                "B* exponent {} outside [1/2, 1]",
                b
            )));
        }
        Ok(())
    }

    pub fn set(&mut self, modulus: u64, b: f64) -> Result<()> {
        Self::check(b)?;
        self.overrides.insert(modulus, b);
        Ok(())
    }

    pub fn b_star(&self, modulus: u64) -> f64 {
        *self.overrides.get(&modulus).unwrap_or(&self.default)
    }
}

/// The exceptional-pair term: over pairs of zeros with at least one
/// synthetic exceptional zero, Gamma(r1) Gamma(r2) / Gamma(r1+r2+1)
/// X^(r1+r2) weighted by conj(chi1)(a1) conj(chi2)(a2) / phi(q1) phi(q2).
/// Pairs (beta1, rho2), (rho1, beta2) and (beta1, beta2) each counted
/// once; ordinary zeros truncated at the companion sets' heights.
#[allow(clippy::too_many_arguments)]
pub fn zterm(
    x: f64,
    a1: u64,
    a2: u64,
    group1: &CharacterGroup,
    group2: &CharacterGroup,
    siegel1: Option<&SiegelDatum>,
    siegel2: Option<&SiegelDatum>,
    zeros1: &ModulusZeros,
    zeros2: &ModulusZeros,
) -> Result<PairedSum> {
    if siegel1.is_none() && siegel2.is_none() {
        return Ok(PairedSum {
            value: 0.0,
            imag_residue: 0.0,
        });
    }
    let ln_x = x.ln();
    let phi12 = (group1.phi() * group2.phi()) as f64;
    let mut acc = ComplexNeumaier::new();
    let mut pending: Result<()> = Ok(());

    if let Some(s1) = siegel1 {
        s1.validate_against(group1)?;
        let chi1 = group1.by_label(s1.label).expect("validated");
        let w1 = chi1.value_conj(a1);
        let r1 = Complex64::new(s1.beta, 0.0);
        for_each_zero(group2, zeros2, |chi2, rho2| {
            if pending.is_err() {
                return;
            }
            match gamma_pair_term(r1, rho2, ln_x) {
                Ok(g) => acc.add(w1 * chi2.value_conj(a2) * g / phi12),
                Err(e) => pending = Err(e),
            }
        })?;
        pending?;
        pending = Ok(());
    }

    if let Some(s2) = siegel2 {
        s2.validate_against(group2)?;
        let chi2 = group2.by_label(s2.label).expect("validated");
        let w2 = chi2.value_conj(a2);
        let r2 = Complex64::new(s2.beta, 0.0);
        for_each_zero(group1, zeros1, |chi1, rho1| {
            if pending.is_err() {
                return;
            }
            match gamma_pair_term(rho1, r2, ln_x) {
                Ok(g) => acc.add(chi1.value_conj(a1) * w2 * g / phi12),
                Err(e) => pending = Err(e),
            }
        })?;
        pending?;
    }

    if let (Some(s1), Some(s2)) = (siegel1, siegel2) {
        let chi1 = group1.by_label(s1.label).expect("validated");
        let chi2 = group2.by_label(s2.label).expect("validated");
        let g = gamma_pair_term(
            Complex64::new(s1.beta, 0.0),
            Complex64::new(s2.beta, 0.0),
            ln_x,
        )?;
        acc.add(chi1.value_conj(a1) * chi2.value_conj(a2) * g / phi12);
    }

    check_imag(acc.value())
}
