//! Sieve-based arithmetic: von Mangoldt values, Euler phi, CRT, and
//! Chebyshev prefix sums on arithmetic progressions.
//!
//! Prefix sums are held as exact i128 fixed-point counts (units of 2^-53,
//! see [`crate::accum`]), so splitting psi(t) over the residue classes of
//! any modulus is an exact integer identity, not a float approximation.

use std::io::{Read, Write};
use std::path::Path;

use crate::accum::{lambda_units, units_to_dd, units_to_f64, DoubleDouble};
use crate::error::{Error, Result};

/// Practical ceiling for the sieve limit; the Lambda array alone costs
/// 8 bytes per integer, so 1e8 is about 800 MB of table.
pub const MAX_SIEVE_LIMIT: u64 = 100_000_000;

/// Above this limit the composite marking runs segment by segment to keep
/// the sieve working set bounded.
const SEGMENTED_THRESHOLD: u64 = 10_000_000;

const SEGMENT_LEN: usize = 1 << 20;

/// Von Mangoldt values Lambda(n) for 1 <= n <= limit, with the nonzero
/// support (prime powers) extracted as a sorted list.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    limit: u64,
    values: Vec<f64>,
    prime_powers: Vec<(u64, f64)>,
}

impl LambdaTable {
    /// Sieves Lambda up to `limit`.
    pub fn build(limit: u64) -> Result<Self> {
        if limit == 0 {
            return Err(Error::InvalidArgument("sieve limit must be >= 1".into()));
        }
        if limit > MAX_SIEVE_LIMIT {
            return Err(Error::SieveLimit {
                requested: limit,
                ceiling: MAX_SIEVE_LIMIT,
            });
        }
        let seg_len = if limit > SEGMENTED_THRESHOLD {
            SEGMENT_LEN
        } else {
            limit as usize + 1
        };
        Ok(Self::build_with_segment_len(limit, seg_len))
    }

    fn build_with_segment_len(limit: u64, seg_len: usize) -> Self {
        let n = limit as usize;
        let mut values = vec![0.0f64; n + 1];

        // Base primes up to sqrt(limit) by a plain sieve.
        let root = (limit as f64).sqrt() as u64 + 1;
        let base = simple_primes(root);

        // Segmented composite marking; values[p] = log p at discovery.
        let mut composite = vec![false; seg_len.min(n + 1)];
        let mut lo = 2usize;
        while lo <= n {
            let hi = (lo + seg_len - 1).min(n);
            let width = hi - lo + 1;
            composite[..width].fill(false);
            for &p in &base {
                let p = p as usize;
                if p * p > hi {
                    break;
                }
                let mut start = ((lo + p - 1) / p) * p;
                if start < p * p {
                    start = p * p;
                }
                let mut m = start;
                while m <= hi {
                    composite[m - lo] = true;
                    m += p;
                }
            }
            for (off, &c) in composite[..width].iter().enumerate() {
                if !c {
                    let p = lo + off;
                    values[p] = (p as f64).ln();
                }
            }
            lo = hi + 1;
        }

        // Proper prime powers reuse the log already stored at the prime.
        for &p in &base {
            if p > limit {
                break;
            }
            let lp = values[p as usize];
            let mut pk = p as u128 * p as u128;
            while pk <= limit as u128 {
                values[pk as usize] = lp;
                pk *= p as u128;
            }
        }

        let prime_powers: Vec<(u64, f64)> = values
            .iter()
            .enumerate()
            .skip(2)
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i as u64, v))
            .collect();

        Self {
            limit,
            values,
            prime_powers,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Lambda(n); zero outside [1, limit].
    #[inline]
    pub fn lambda(&self, n: u64) -> f64 {
        if n as usize >= self.values.len() {
            return 0.0;
        }
        self.values[n as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sorted (n, Lambda(n)) over the nonzero support.
    pub fn prime_powers(&self) -> &[(u64, f64)] {
        &self.prime_powers
    }

    /// Binary dump: magic "LTBL1", limit as u64 LE, then limit f64 LE
    /// values for n = 1..=limit.
    pub fn dump_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(b"LTBL1")?;
        f.write_all(&self.limit.to_le_bytes())?;
        for &v in &self.values[1..] {
            f.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 5];
        f.read_exact(&mut magic)?;
        if &magic != b"LTBL1" {
            return Err(Error::InvalidArgument(format!(
                "{}: bad magic in Lambda table dump",
                path.display()
            )));
        }
        let mut buf8 = [0u8; 8];
        f.read_exact(&mut buf8)?;
        let limit = u64::from_le_bytes(buf8);
        if limit == 0 || limit > MAX_SIEVE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "{}: limit {} out of range",
                path.display(),
                limit
            )));
        }
        let mut values = vec![0.0f64; limit as usize + 1];
        for v in values[1..].iter_mut() {
            f.read_exact(&mut buf8)?;
            *v = f64::from_le_bytes(buf8);
        }
        let prime_powers: Vec<(u64, f64)> = values
            .iter()
            .enumerate()
            .skip(2)
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i as u64, v))
            .collect();
        Ok(Self {
            limit,
            values,
            prime_powers,
        })
    }
}

/// Plain sieve of Eratosthenes for the base primes.
fn simple_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Euler phi via trial-division factorization.
pub fn euler_phi(q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::InvalidArgument("euler_phi(0) is undefined".into()));
    }
    let mut phi = q;
    let mut m = q;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            phi = phi / p * (p - 1);
            while m % p == 0 {
                m /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        phi = phi / m * (m - 1);
    }
    Ok(phi)
}

/// Factorization as (prime, exponent) pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Modular inverse of `a` mod `m` (requires gcd(a, m) = 1).
pub fn mod_inverse(a: u64, m: u64) -> Result<u64> {
    if m == 1 {
        return Ok(0);
    }
    let (g, x, _) = ext_gcd(a as i128 % m as i128, m as i128);
    if g != 1 {
        return Err(Error::InvalidArgument(format!(
            "{} has no inverse mod {}",
            a, m
        )));
    }
    Ok((x.rem_euclid(m as i128)) as u64)
}

/// Solves A = a1 (mod q1), A = a2 (mod q2) for coprime moduli, giving the
/// residue A mod q1*q2 via the a1*m1*q2 + a2*m2*q1 combination with
/// m1*q2 + m2*q1 = 1.
pub fn crt_combine(a1: u64, q1: u64, a2: u64, q2: u64) -> Result<u64> {
    if q1 == 0 || q2 == 0 {
        return Err(Error::InvalidArgument("crt modulus must be >= 1".into()));
    }
    if gcd(q1, q2) != 1 {
        return Err(Error::NonCoprimeModuli(q1, q2));
    }
    let (q1i, q2i) = (q1 as i128, q2 as i128);
    let (g, m1, m2) = ext_gcd(q2i, q1i); // m1*q2 + m2*q1 = g = 1
    debug_assert_eq!(g, 1);
    let q = q1i * q2i;
    let a = (a1 as i128 % q1i) * m1 % q * q2i % q + (a2 as i128 % q2i) * m2 % q * q1i % q;
    Ok(a.rem_euclid(q) as u64)
}

/// Prefix sums of Lambda over one arithmetic progression: the exact count
/// at index t is psi(t, q, a) in 2^-53 units.
#[derive(Debug, Clone)]
pub struct ProgressionPrefix {
    modulus: u64,
    residue: u64,
    units: Vec<i128>,
}

impl ProgressionPrefix {
    /// Residue convention: a in [0, q); q = 1 means no restriction and
    /// requires a = 0.
    pub fn new(table: &LambdaTable, modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be >= 1".into()));
        }
        if residue >= modulus {
            return Err(Error::BadResidue {
                residue,
                modulus,
            });
        }
        let n = table.limit() as usize;
        let mut units = vec![0i128; n + 1];
        let mut acc = 0i128;
        if modulus == 1 {
            for t in 1..=n {
                let v = table.values()[t];
                if v != 0.0 {
                    acc += lambda_units(v);
                }
                units[t] = acc;
            }
        } else {
            let (q, a) = (modulus as usize, residue as usize);
            for t in 1..=n {
                if t % q == a {
                    let v = table.values()[t];
                    if v != 0.0 {
                        acc += lambda_units(v);
                    }
                }
                units[t] = acc;
            }
        }
        Ok(Self {
            modulus,
            residue,
            units,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn limit(&self) -> usize {
        self.units.len() - 1
    }

    /// psi(t, q, a) at an integer index.
    #[inline]
    pub fn psi_at(&self, t: usize) -> f64 {
        units_to_f64(self.units_at(t))
    }

    /// psi(t, q, a) at a real argument (steps at integers).
    #[inline]
    pub fn psi(&self, t: f64) -> f64 {
        if t < 1.0 {
            return 0.0;
        }
        self.psi_at(t.floor() as usize)
    }

    /// Exact fixed-point count at an integer index (saturates at the
    /// table limit).
    #[inline]
    pub fn units_at(&self, t: usize) -> i128 {
        let t = t.min(self.units.len() - 1);
        self.units[t]
    }

    /// Exact double-double view of psi at an integer index.
    #[inline]
    pub fn psi_dd_at(&self, t: usize) -> DoubleDouble {
        units_to_dd(self.units_at(t))
    }
}

/// psi(t, M, r) for every residue r mod M at a single point t, as exact
/// units. One pass over the nonzero support; used where building
/// per-residue prefix tables would be wasteful (primorial moduli).
pub fn progression_spectrum(table: &LambdaTable, t: u64, modulus: u64) -> Vec<i128> {
    let mut buckets = vec![0i128; modulus as usize];
    for &(n, v) in table.prime_powers() {
        if n > t {
            break;
        }
        buckets[(n % modulus) as usize] += lambda_units(v);
    }
    buckets
}
