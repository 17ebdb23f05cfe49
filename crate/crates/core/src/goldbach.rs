//! Weighted Goldbach sums in arithmetic progressions: the pair function
//! G, its summatory function S, the explicit-formula decomposition report
//! with exact residual bookkeeping, and the lower-bound machinery
//! (character-sum check and the primorial CRT construction).

use rayon::prelude::*;
use serde::Serialize;

use crate::accum::{units_to_f64, DoubleDouble, Neumaier};
use crate::arith::{crt_combine, euler_phi, gcd, progression_spectrum, LambdaTable, ProgressionPrefix};
use crate::chars::CharacterGroup;
use crate::error::{Error, Result};
use crate::zeros::{zero_sum_h, zterm, ExponentConfig, ModulusZeros, SiegelDatum};

/// Validates a residue against the a in [0, q), gcd(a, q) = 1 convention
/// (q = 1 canonicalizes to a = 0).
pub fn check_unit_residue(a: u64, q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be >= 1".into()));
    }
    let ok = if q == 1 { a == 0 } else { a < q && gcd(a, q) == 1 };
    if ok {
        Ok(())
    } else {
        Err(Error::BadResidue { residue: a, modulus: q })
    }
}

/// Parameters of one decomposition run.
#[derive(Debug, Clone)]
pub struct GoldbachConfig {
    pub x: f64,
    pub q1: u64,
    pub q2: u64,
    pub a1: u64,
    pub a2: u64,
    pub truncation: f64,
    pub exponents: ExponentConfig,
    pub siegel1: Option<SiegelDatum>,
    pub siegel2: Option<SiegelDatum>,
}

impl GoldbachConfig {
    pub fn new(x: f64, q1: u64, q2: u64, a1: u64, a2: u64, truncation: f64) -> Result<Self> {
        let cfg = Self {
            x,
            q1,
            q2,
            a1,
            a2,
            truncation,
            exponents: ExponentConfig::default(),
            siegel1: None,
            siegel2: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_residue(self.a1, self.q1)?;
        check_unit_residue(self.a2, self.q2)?;
        if self.x < 2.0 {
            return Err(Error::InvalidArgument(format!("X = {} below 2", self.x)));
        }
        if self.truncation < 0.0 {
            return Err(Error::InvalidArgument("truncation height negative".into()));
        }
        Ok(())
    }
}

/// G(n) = sum over m + l = n, m = a1 (q1), l = a2 (q2) of
/// Lambda(m) Lambda(l). Returns 0 for n < 2 by convention.
pub fn goldbach_g(table: &LambdaTable, n: u64, q1: u64, q2: u64, a1: u64, a2: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut acc = Neumaier::new();
    for &(m, lm) in table.prime_powers() {
        if m >= n {
            break;
        }
        if m % q1 != a1 % q1 {
            continue;
        }
        let l = n - m;
        if l % q2 != a2 % q2 {
            continue;
        }
        let ll = table.lambda(l);
        if ll != 0.0 {
            acc.add(lm * ll);
        }
    }
    acc.value()
}

/// G(n) for every n <= cap at once: one pass over prime-power pairs.
/// Entries that receive no pair stay exactly 0.0.
pub fn goldbach_g_table(
    table: &LambdaTable,
    cap: u64,
    q1: u64,
    q2: u64,
    a1: u64,
    a2: u64,
) -> Vec<f64> {
    let mut g = vec![0.0f64; cap as usize + 1];
    let class1: Vec<(u64, f64)> = table
        .prime_powers()
        .iter()
        .copied()
        .take_while(|&(m, _)| m < cap)
        .filter(|&(m, _)| m % q1 == a1 % q1)
        .collect();
    for &(m, lm) in &class1 {
        for &(l, ll) in table.prime_powers() {
            let n = m + l;
            if n > cap {
                break;
            }
            if l % q2 == a2 % q2 {
                g[n as usize] += lm * ll;
            }
        }
    }
    g
}

const SUMMATORY_BLOCK: usize = 4096;

/// S(X) = sum_{n<=X} G(n), computed as sum over m in the first
/// progression of Lambda(m) psi(X - m, q2, a2). Double-double
/// accumulation in fixed block order: the result matches the brute
/// double loop to the last f64 bit and is independent of thread count.
pub fn summatory_s(
    table: &LambdaTable,
    q1: u64,
    a1: u64,
    prefix2: &ProgressionPrefix,
    x: f64,
) -> Result<f64> {
    check_unit_residue(a1, q1)?;
    if x > table.limit() as f64 + 1.0 {
        return Err(Error::SieveLimit {
            requested: x as u64,
            ceiling: table.limit(),
        });
    }
    let cap = x.floor() as u64;
    let class1: Vec<(u64, f64)> = table
        .prime_powers()
        .iter()
        .copied()
        .take_while(|&(m, _)| m + 1 <= cap)
        .filter(|&(m, _)| m % q1 == a1 % q1)
        .collect();
    let partials: Vec<DoubleDouble> = class1
        .par_chunks(SUMMATORY_BLOCK)
        .map(|chunk| {
            let mut dd = DoubleDouble::zero();
            for &(m, lm) in chunk {
                let psi = prefix2.psi_dd_at((cap - m) as usize);
                dd.add_prod(lm, psi.hi);
                dd.add_prod(lm, psi.lo);
            }
            dd
        })
        .collect();
    let mut total = DoubleDouble::zero();
    for p in partials {
        total.add(p);
    }
    Ok(total.value())
}

/// Reference implementation: the brute-force double loop over
/// prime-power pairs, same double-double accumulation.
pub fn summatory_s_brute(
    table: &LambdaTable,
    x: f64,
    q1: u64,
    q2: u64,
    a1: u64,
    a2: u64,
) -> f64 {
    let cap = x.floor() as u64;
    let mut dd = DoubleDouble::zero();
    for &(m, lm) in table.prime_powers() {
        if m >= cap {
            break;
        }
        if m % q1 != a1 % q1 {
            continue;
        }
        for &(l, ll) in table.prime_powers() {
            if m + l > cap {
                break;
            }
            if l % q2 == a2 % q2 {
                dd.add_prod(lm, ll);
            }
        }
    }
    dd.value()
}

/// Truncation-tail diagnostics attached to a decomposition report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncationDiagnostics {
    /// Common zero truncation height.
    pub t: f64,
    /// Integral estimate of the dropped |gamma| > T mass of each H term:
    /// X^(3/2) (log(q T / 2 pi) + 1) / (pi T).
    pub h1_tail_bound: f64,
    pub h2_tail_bound: f64,
    /// X^(beta~ + 1/2) / T per active exceptional pair family.
    pub z_tail_bound: f64,
}

fn h_tail_bound(x: f64, q: u64, t: f64) -> f64 {
    if t < 1.0 {
        return f64::INFINITY;
    }
    x.powf(1.5) * ((q as f64 * t / (2.0 * std::f64::consts::PI)).ln() + 1.0)
        / (std::f64::consts::PI * t)
}

/// The assembled decomposition of S(X): every explicit-formula main term
/// plus the residual defined by exact subtraction.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub x: f64,
    pub q1: u64,
    pub q2: u64,
    pub a1: u64,
    pub a2: u64,
    pub s_exact: f64,
    /// X^2 / (2 phi(q1) phi(q2)).
    pub main_term: f64,
    /// H(X, q1, a1) / phi(q2).
    pub h1_term: f64,
    /// H(X, q2, a2) / phi(q1).
    pub h2_term: f64,
    pub z_term: f64,
    /// s_exact - (((main + h1) + h2) + z), in exactly that association.
    pub residual: f64,
    /// residual / (X^(b1*+b2*) log X log(q1 X) log(q2 X)).
    pub bound_ratio: f64,
    pub b_star_1: f64,
    pub b_star_2: f64,
    pub siegel1_active: bool,
    pub siegel2_active: bool,
    pub truncation: TruncationDiagnostics,
    /// Where the zero data came from (computed | file:...).
    pub zero_source: String,
    pub h1_imag_residue: f64,
    pub h2_imag_residue: f64,
    pub z_imag_residue: f64,
}

impl DecompositionReport {
    /// The exact-bookkeeping identity: recomputes the defining
    /// subtraction from the stored fields.
    pub fn bookkeeping_exact(&self) -> bool {
        let terms = ((self.main_term + self.h1_term) + self.h2_term) + self.z_term;
        self.residual == self.s_exact - terms
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.x,
            self.s_exact,
            self.main_term,
            self.h1_term,
            self.h2_term,
            self.z_term,
            self.residual,
            self.bound_ratio
        )
    }
}

/// Synthetic exceptional zeros enter the H sum exactly as ordinary real
/// zeros would: -conj(chi~)(a) X^(beta+1)/(beta (beta+1)) / phi(q).
fn siegel_h_extra(
    siegel: &SiegelDatum,
    a: u64,
    group: &CharacterGroup,
    x: f64,
) -> Result<f64> {
    siegel.validate_against(group)?;
    let chi = group.by_label(siegel.label).expect("validated");
    let w = chi.value_conj(a).re; // real character
    let b = siegel.beta;
    Ok(-w * x.powf(b + 1.0) / (b * (b + 1.0)) / group.phi() as f64)
}

/// Computes every named term of the decomposition and the residual by
/// subtraction.
pub fn assemble_report(
    table: &LambdaTable,
    config: &GoldbachConfig,
    group1: &CharacterGroup,
    group2: &CharacterGroup,
    zeros1: &ModulusZeros,
    zeros2: &ModulusZeros,
    zero_source: &str,
) -> Result<DecompositionReport> {
    config.validate()?;
    if group1.modulus() != config.q1 || group2.modulus() != config.q2 {
        return Err(Error::InvalidArgument(
            "character groups do not match the configured moduli".into(),
        ));
    }
    let x = config.x;
    let prefix2 = ProgressionPrefix::new(table, config.q2, config.a2)?;
    let s_exact = summatory_s(table, config.q1, config.a1, &prefix2, x)?;

    let phi1 = group1.phi() as f64;
    let phi2 = group2.phi() as f64;
    let main_term = x * x / (2.0 * phi1 * phi2);

    let h1 = zero_sum_h(x, config.a1, group1, zeros1)?;
    let h2 = zero_sum_h(x, config.a2, group2, zeros2)?;
    let mut h1_value = h1.value;
    let mut h2_value = h2.value;
    if let Some(s) = &config.siegel1 {
        h1_value += siegel_h_extra(s, config.a1, group1, x)?;
    }
    if let Some(s) = &config.siegel2 {
        h2_value += siegel_h_extra(s, config.a2, group2, x)?;
    }
    let h1_term = h1_value / phi2;
    let h2_term = h2_value / phi1;

    let z = zterm(
        x,
        config.a1,
        config.a2,
        group1,
        group2,
        config.siegel1.as_ref(),
        config.siegel2.as_ref(),
        zeros1,
        zeros2,
    )?;

    let terms = ((main_term + h1_term) + h2_term) + z.value;
    let residual = s_exact - terms;

    let b1 = config.exponents.b_star(config.q1);
    let b2 = config.exponents.b_star(config.q2);
    let denom =
        x.powf(b1 + b2) * x.ln() * (config.q1 as f64 * x).ln() * (config.q2 as f64 * x).ln();

    let t = zeros1.truncation().min(zeros2.truncation());
    let mut z_tail = 0.0;
    if let Some(s) = &config.siegel1 {
        z_tail += if zeros2.truncation() < 1.0 {
            0.0
        } else {
            x.powf(s.beta + 0.5) / zeros2.truncation()
        };
    }
    if let Some(s) = &config.siegel2 {
        z_tail += if zeros1.truncation() < 1.0 {
            0.0
        } else {
            x.powf(s.beta + 0.5) / zeros1.truncation()
        };
    }

    Ok(DecompositionReport {
        x,
        q1: config.q1,
        q2: config.q2,
        a1: config.a1,
        a2: config.a2,
        s_exact,
        main_term,
        h1_term,
        h2_term,
        z_term: z.value,
        residual,
        bound_ratio: residual / denom,
        b_star_1: b1,
        b_star_2: b2,
        siegel1_active: config.siegel1.is_some(),
        siegel2_active: config.siegel2.is_some(),
        truncation: TruncationDiagnostics {
            t,
            h1_tail_bound: h_tail_bound(x, config.q1, zeros1.truncation()),
            h2_tail_bound: h_tail_bound(x, config.q2, zeros2.truncation()),
            z_tail_bound: z_tail,
        },
        zero_source: zero_source.to_string(),
        h1_imag_residue: h1.imag_residue,
        h2_imag_residue: h2.imag_residue,
        z_imag_residue: z.imag_residue,
    })
}

/// Character-sum smallness check over the dyadic window [x, 2x]:
/// |x - sum Lambda(n) chi0(n)| + sum over nonprincipal chi of
/// |sum Lambda(n) chi(n)| against the x/2 threshold.
#[derive(Debug, Clone, Serialize)]
pub struct GallagherReport {
    pub x: f64,
    pub modulus: u64,
    pub lhs: f64,
    pub threshold: f64,
    pub pass: bool,
    /// |sum| per nonprincipal character, label order.
    pub character_sums: Vec<f64>,
}

pub fn gallagher_check(table: &LambdaTable, x: f64, q: u64) -> Result<GallagherReport> {
    if x < 2.0 || 2.0 * x > table.limit() as f64 {
        return Err(Error::InvalidArgument(format!(
            "window [{} , {}] outside sieve range",
            x,
            2.0 * x
        )));
    }
    let group = CharacterGroup::enumerate(q)?;
    let window: Vec<(u64, f64)> = table
        .prime_powers()
        .iter()
        .copied()
        .skip_while(|&(n, _)| (n as f64) < x)
        .take_while(|&(n, _)| n as f64 <= 2.0 * x)
        .collect();

    let mut lhs = 0.0;
    let mut character_sums = Vec::new();
    for chi in group.characters() {
        let mut acc = crate::accum::ComplexNeumaier::new();
        for &(n, lambda) in &window {
            let w = chi.value(n);
            if w != num_complex::Complex64::new(0.0, 0.0) {
                acc.add(w * lambda);
            }
        }
        let s = acc.value();
        if chi.is_principal() {
            lhs += (x - s.re).abs().hypot(s.im);
        } else {
            character_sums.push(s.norm());
            lhs += s.norm();
        }
    }
    Ok(GallagherReport {
        x,
        modulus: q,
        lhs,
        threshold: x / 2.0,
        pass: lhs <= x / 2.0,
        character_sums,
    })
}

/// Both sides of the primorial CRT lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct OmegaConstructionReport {
    pub x: f64,
    pub prime_cutoff: u64,
    /// Q = product of primes p <= y, p coprime to q1 q2 (and p != p1
    /// when an excluded prime is supplied).
    pub primorial: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub excluded_prime: Option<u64>,
}

/// lhs = sum over b coprime to Q of psi(2x, q1 Q, A_b) psi(2x, q2 Q, B_b)
/// with A_b, B_b from the CRT combination; rhs = the
/// x^2 / (4 phi(q1) phi(q2) phi(Q)) lower bound.
///
/// `excluded_prime` is the experimentation hook for the exceptional-prime
/// exclusion; in the default GRH/desk mode it is None and the exclusion
/// is a no-op.
#[allow(clippy::too_many_arguments)]
pub fn omega_construction(
    table: &LambdaTable,
    x: f64,
    y: u64,
    q1: u64,
    q2: u64,
    a1: u64,
    a2: u64,
    excluded_prime: Option<u64>,
) -> Result<OmegaConstructionReport> {
    check_unit_residue(a1, q1)?;
    check_unit_residue(a2, q2)?;
    if 2.0 * x > table.limit() as f64 {
        return Err(Error::InvalidArgument(format!(
            "2x = {} beyond sieve limit",
            2.0 * x
        )));
    }
    let mut primorial: u128 = 1;
    let mut p = 2u64;
    while p <= y {
        let f = crate::arith::factorize(p);
        let is_prime = f.len() == 1 && f[0] == (p, 1);
        if is_prime && (q1 * q2) % p != 0 && Some(p) != excluded_prime {
            primorial *= p as u128;
            if primorial > 1_000_000 {
                return Err(Error::InvalidArgument(format!(
                    "primorial overflow: product of primes <= {} too large",
                    y
                )));
            }
        }
        p += 1;
    }
    let q_mod = primorial as u64;
    let m1 = q1 * q_mod;
    let m2 = q2 * q_mod;
    let t = (2.0 * x).floor() as u64;
    if gcd(q1, q_mod) != 1 || gcd(q2, q_mod) != 1 {
        return Err(Error::NonCoprimeModuli(q1.max(q2), q_mod));
    }

    let spec1 = progression_spectrum(table, t, m1);
    let spec2 = progression_spectrum(table, t, m2);

    let mut lhs = Neumaier::new();
    for b in 0..q_mod {
        if q_mod != 1 && gcd(b, q_mod) != 1 {
            continue;
        }
        let a_b = crt_combine(a1, q1, b, q_mod)?;
        let b_b = crt_combine(a2, q2, (q_mod - b) % q_mod, q_mod)?;
        let psi_a = units_to_f64(spec1[a_b as usize]);
        let psi_b = units_to_f64(spec2[b_b as usize]);
        lhs.add(psi_a * psi_b);
    }
    let lhs = lhs.value();
    let rhs = x * x
        / (4.0
            * euler_phi(q1)? as f64
            * euler_phi(q2)? as f64
            * euler_phi(q_mod.max(1))? as f64);
    Ok(OmegaConstructionReport {
        x,
        prime_cutoff: y,
        primorial: q_mod,
        lhs,
        rhs,
        pass: lhs >= rhs,
        excluded_prime,
    })
}

/// One row of the growth scan: running maximum of G(n)/(n log log n)
/// over 16 <= n <= x.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OmegaScanRow {
    pub x: u64,
    pub max_ratio: f64,
    pub argmax_n: u64,
}

/// Running maxima of the normalized pair counts over a doubling grid
/// x = 2, 4, ..., 2^floor(log2 N). The scan starts at n = 16 so
/// log log n stays comfortably positive.
pub fn omega_scan(
    table: &LambdaTable,
    n_max: u64,
    q1: u64,
    q2: u64,
    a1: u64,
    a2: u64,
) -> Result<Vec<OmegaScanRow>> {
    check_unit_residue(a1, q1)?;
    check_unit_residue(a2, q2)?;
    if n_max < 2 || n_max > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "scan limit {} outside [2, sieve limit]",
            n_max
        )));
    }
    let g = goldbach_g_table(table, n_max, q1, q2, a1, a2);
    let mut rows = Vec::new();
    let mut best = 0.0f64;
    let mut best_n = 0u64;
    let mut next_mark = 2u64;
    for n in 2..=n_max {
        if n >= 16 {
            let ratio = g[n as usize] / (n as f64 * (n as f64).ln().ln());
            if ratio > best {
                best = ratio;
                best_n = n;
            }
        }
        if n == next_mark {
            rows.push(OmegaScanRow {
                x: n,
                max_ratio: best,
                argmax_n: best_n,
            });
            next_mark *= 2;
        }
    }
    Ok(rows)
}
