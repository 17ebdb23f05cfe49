//! Dirichlet characters mod q with exact root-of-unity arithmetic.
//!
//! The group (Z/qZ)* is split into cyclic components by CRT (with the
//! <-1> x <5> split at 2^k, k >= 3). A character is identified by a
//! Conrey-style integer label n coprime to q: the pairing of the label's
//! discrete logs against the argument's makes labels multiplicative,
//! chi_m * chi_n = chi_{mn mod q}, and matches the labeling used by the
//! public L-function tables.
//!
//! Exact exponents (value = e(a)/order as a fraction of a full turn) are
//! the source of truth; complex floats are derived views.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::accum::ComplexNeumaier;
use crate::arith::{crt_combine, euler_phi, factorize, gcd, mod_inverse};
use crate::error::{Error, Result};

/// One cyclic component of (Z/qZ)*: dlog table for the residues of one
/// prime-power factor of q.
#[derive(Debug, Clone)]
struct CyclicComponent {
    prime: u64,
    prime_power: u64,
    /// Generator inside the prime-power factor.
    generator: u64,
    order: u64,
    /// dlog[r mod prime_power] = k with generator^k = r; u64::MAX marks
    /// non-units and (for the 2^k split) residues handled by the other
    /// component jointly.
    dlog: Vec<u64>,
}

/// A Dirichlet character mod q.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    modulus: u64,
    label: u64,
    order: u64,
    /// Exponent map over residues 0..q: chi(a) = e(exponents[a] / order),
    /// None exactly when gcd(a, q) > 1.
    exponents: Vec<Option<u64>>,
    /// Precomputed roots of unity e(k/order), k = 0..order.
    roots: Vec<Complex64>,
    conductor: u64,
    induced_from: u64,
    is_principal: bool,
    is_real: bool,
    is_primitive: bool,
}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn label(&self) -> u64 {
        self.label
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Conrey label of the primitive character mod `conductor()` that
    /// induces this one.
    pub fn induced_from(&self) -> u64 {
        self.induced_from
    }

    pub fn is_principal(&self) -> bool {
        self.is_principal
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn is_primitive(&self) -> bool {
        self.is_primitive
    }

    /// chi(-1) = +1 (even) or -1 (odd).
    pub fn is_even(&self) -> bool {
        let m1 = if self.modulus <= 2 { 1 } else { self.modulus - 1 };
        self.exponent(m1) == Some(0)
    }

    /// Exact exponent k with chi(m) = e(k / order), or None when
    /// chi(m) = 0.
    #[inline]
    pub fn exponent(&self, m: u64) -> Option<u64> {
        self.exponents[(m % self.modulus) as usize]
    }

    /// chi(m) as a complex float.
    #[inline]
    pub fn value(&self, m: u64) -> Complex64 {
        match self.exponent(m) {
            Some(e) => self.roots[e as usize],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// conj(chi)(m).
    #[inline]
    pub fn value_conj(&self, m: u64) -> Complex64 {
        self.value(m).conj()
    }
}

/// All phi(q) characters mod q, labels ascending.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    modulus: u64,
    characters: Vec<DirichletCharacter>,
    /// Cyclic decomposition of (Z/qZ)*: (generator lifted mod q, order).
    generators: Vec<(u64, u64)>,
}

/// Smallest primitive root mod p^2; generates (Z/p^k)* for every k >= 1.
fn conrey_generator(p: u64) -> u64 {
    let p2 = p * p;
    let phi = p * (p - 1);
    let factors = factorize(phi);
    'g: for g in 2..p2 {
        if g % p == 0 {
            continue;
        }
        for &(f, _) in &factors {
            if pow_mod(g, phi / f, p2) == 1 {
                continue 'g;
            }
        }
        return g;
    }
    unreachable!("primitive root mod p^2 exists for every odd prime");
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bb = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % m as u128;
        }
        bb = bb * bb % m as u128;
        e >>= 1;
    }
    acc as u64
}

fn cyclic_components(p: u64, e: u32) -> Vec<CyclicComponent> {
    let pe = p.pow(e);
    if p == 2 {
        match e {
            0 | 1 => Vec::new(),
            2 => {
                // <3> = <-1> of order 2 mod 4.
                let mut dlog = vec![u64::MAX; 4];
                dlog[1] = 0;
                dlog[3] = 1;
                vec![CyclicComponent {
                    prime: 2,
                    prime_power: 4,
                    generator: 3,
                    order: 2,
                    dlog,
                }]
            }
            _ => {
                // (Z/2^e)* = <-1> x <5>; every odd residue is
                // (-1)^s * 5^t with s in {0,1}, t mod 2^(e-2).
                let half = pe / 4;
                let mut sign_dlog = vec![u64::MAX; pe as usize];
                let mut five_dlog = vec![u64::MAX; pe as usize];
                let mut pow5 = 1u64;
                for t in 0..half {
                    sign_dlog[pow5 as usize] = 0;
                    five_dlog[pow5 as usize] = t;
                    let neg = pe - pow5;
                    sign_dlog[neg as usize] = 1;
                    five_dlog[neg as usize] = t;
                    pow5 = pow5 * 5 % pe;
                }
                vec![
                    CyclicComponent {
                        prime: 2,
                        prime_power: pe,
                        generator: pe - 1,
                        order: 2,
                        dlog: sign_dlog,
                    },
                    CyclicComponent {
                        prime: 2,
                        prime_power: pe,
                        generator: 5,
                        order: half,
                        dlog: five_dlog,
                    },
                ]
            }
        }
    } else {
        let g = conrey_generator(p) % pe;
        let order = euler_phi(pe).expect("pe >= 1");
        let mut dlog = vec![u64::MAX; pe as usize];
        let mut pw = 1u64;
        for k in 0..order {
            dlog[pw as usize] = k;
            pw = (pw as u128 * g as u128 % pe as u128) as u64;
        }
        vec![CyclicComponent {
            prime: p,
            prime_power: pe,
            generator: g,
            order,
            dlog,
        }]
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl CharacterGroup {
    /// Enumerates all phi(q) characters mod q in ascending label order.
    pub fn enumerate(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("modulus must be >= 1".into()));
        }
        let components: Vec<CyclicComponent> = factorize(q)
            .into_iter()
            .flat_map(|(p, e)| cyclic_components(p, e))
            .collect();

        // dlog vectors for every unit, indexed by residue.
        let units: Vec<u64> = if q == 1 {
            vec![1]
        } else {
            (1..=q).filter(|&a| gcd(a, q) == 1).collect()
        };
        let dlogs = |m: u64| -> Vec<u64> {
            components
                .iter()
                .map(|c| c.dlog[(m % c.prime_power) as usize])
                .collect()
        };

        let group_exponent = components.iter().fold(1u64, |l, c| lcm(l, c.order));

        let characters: Vec<DirichletCharacter> = units
            .iter()
            .map(|&label| {
                build_character(q, label, &components, &units, &dlogs, group_exponent)
            })
            .collect();

        let generators = components
            .iter()
            .map(|c| {
                let lifted = if q == c.prime_power {
                    c.generator
                } else {
                    crt_combine(c.generator, c.prime_power, 1, q / c.prime_power)
                        .expect("prime-power factors are coprime")
                };
                (lifted, c.order)
            })
            .collect();

        Ok(Self {
            modulus: q,
            characters,
            generators,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn phi(&self) -> u64 {
        self.characters.len() as u64
    }

    pub fn characters(&self) -> &[DirichletCharacter] {
        &self.characters
    }

    pub fn generators(&self) -> &[(u64, u64)] {
        &self.generators
    }

    pub fn principal(&self) -> &DirichletCharacter {
        self.characters
            .iter()
            .find(|c| c.is_principal)
            .expect("group always contains the principal character")
    }

    pub fn by_label(&self, label: u64) -> Option<&DirichletCharacter> {
        self.characters.iter().find(|c| c.label == label)
    }

    /// Label of the conjugate character (the inverse label mod q).
    pub fn conjugate_label(&self, label: u64) -> u64 {
        if self.modulus == 1 {
            return 1;
        }
        let inv = mod_inverse(label, self.modulus).expect("labels are units");
        if inv == 0 {
            1
        } else {
            inv
        }
    }

    /// Unit residues mod q in ascending order (label domain).
    pub fn units(&self) -> Vec<u64> {
        if self.modulus == 1 {
            vec![0]
        } else {
            (1..self.modulus)
                .filter(|&a| gcd(a, self.modulus) == 1)
                .collect()
        }
    }

    /// CSV table of the group: label, order, conductor, flags, and the
    /// exact value exponents over ascending units.
    pub fn export_csv(&self) -> String {
        let mut out = String::from(
            "label,order,conductor,principal,real,primitive,unit_exponents\n",
        );
        let units: Vec<u64> = if self.modulus == 1 {
            vec![1]
        } else {
            (1..=self.modulus)
                .filter(|&a| gcd(a, self.modulus) == 1)
                .collect()
        };
        for ch in &self.characters {
            let exps: Vec<String> = units
                .iter()
                .map(|&u| ch.exponent(u).map(|e| e.to_string()).unwrap_or_default())
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                ch.label,
                ch.order,
                ch.conductor,
                ch.is_principal as u8,
                ch.is_real as u8,
                ch.is_primitive as u8,
                exps.join(" ")
            ));
        }
        out
    }
}

fn build_character(
    q: u64,
    label: u64,
    components: &[CyclicComponent],
    units: &[u64],
    dlogs: &dyn Fn(u64) -> Vec<u64>,
    group_exponent: u64,
) -> DirichletCharacter {
    let coeffs = dlogs(label);

    // Character order: lcm over components of d / gcd(d, c).
    let order = components
        .iter()
        .zip(&coeffs)
        .fold(1u64, |l, (comp, &c)| {
            lcm(l, comp.order / gcd(comp.order, c))
        });

    // Exponent over L = group exponent, then reduced to the character's
    // own order (exact integer arithmetic throughout).
    let mut exponents = vec![None; q as usize];
    for &m in units {
        let xs = dlogs(m);
        let mut num: u128 = 0;
        for ((comp, &c), &x) in components.iter().zip(&coeffs).zip(&xs) {
            num += c as u128 * x as u128 % comp.order as u128
                * (group_exponent / comp.order) as u128;
        }
        let num = (num % group_exponent as u128) as u64;
        // e(m) = num * order / L mod order; integral because the
        // character has that order.
        let scaled = num as u128 * order as u128;
        debug_assert_eq!(scaled % group_exponent as u128, 0);
        let e = (scaled / group_exponent as u128 % order as u128) as u64;
        exponents[(m % q) as usize] = Some(e);
    }

    let (conductor, induced_from) = conductor_of(q, components, &coeffs);

    let roots: Vec<Complex64> = (0..order)
        .map(|k| {
            let theta = 2.0 * PI * (k as f64) / (order as f64);
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    DirichletCharacter {
        modulus: q,
        label,
        order,
        exponents,
        roots,
        conductor,
        induced_from,
        is_principal: order == 1,
        is_real: order <= 2,
        is_primitive: conductor == q,
    }
}

/// Conductor and inducing primitive label, componentwise: each cyclic
/// factor contributes the smallest prime power its restriction factors
/// through, and the primitive label is the CRT combination of the
/// component labels.
fn conductor_of(q: u64, components: &[CyclicComponent], coeffs: &[u64]) -> (u64, u64) {
    if q == 1 {
        return (1, 1);
    }
    let mut conductor = 1u64;
    // (residue, modulus) pieces of the primitive label.
    let mut label_parts: Vec<(u64, u64)> = Vec::new();

    let mut i = 0;
    while i < components.len() {
        let comp = &components[i];
        let p = comp.prime;
        let pe = comp.prime_power;
        if p == 2 && i + 1 < components.len() && components[i + 1].prime_power == pe {
            // The <-1> x <5> pair for 2^e, e >= 3.
            let c_sign = coeffs[i];
            let c_five = coeffs[i + 1];
            let half = components[i + 1].order;
            if c_five != 0 {
                let v2 = c_five.trailing_zeros() as u64;
                let m = (half.trailing_zeros() as u64) - v2; // order of 5-part = 2^m
                let f = 1u64 << (m + 2);
                let c_five_star = c_five >> (pe.trailing_zeros() as u64 - 2 - m);
                let mut lbl = pow_mod(5, c_five_star, f);
                if c_sign == 1 {
                    lbl = (f - lbl) % f;
                }
                conductor *= f;
                label_parts.push((lbl, f));
            } else if c_sign == 1 {
                conductor *= 4;
                label_parts.push((3, 4));
            }
            i += 2;
        } else if p == 2 {
            // Single component mod 4.
            if coeffs[i] != 0 {
                conductor *= 4;
                label_parts.push((3, 4));
            }
            i += 1;
        } else {
            let c = coeffs[i];
            if c != 0 {
                let d = comp.order;
                let o = d / gcd(d, c);
                // p-part of the component order fixes the exponent.
                let mut j = 0u32;
                let mut t = o;
                while t % p == 0 {
                    t /= p;
                    j += 1;
                }
                let f = p.pow(j + 1);
                let c_star = c / (pe / f); // c * phi(f)/phi(pe), exact
                let lbl = pow_mod(comp.generator % f, c_star, f);
                conductor *= f;
                label_parts.push((lbl, f));
            }
            i += 1;
        }
    }

    let mut label = 1u64;
    let mut modulus = 1u64;
    for (r, m) in label_parts {
        label = crt_combine(label, modulus, r, m).expect("conductor factors coprime");
        modulus *= m;
    }
    if modulus == 1 {
        label = 1;
    }
    (conductor, label)
}

/// The conductor of chi together with the primitive character inducing it.
pub fn conductor_and_primitive(chi: &DirichletCharacter) -> Result<(u64, DirichletCharacter)> {
    let group = CharacterGroup::enumerate(chi.conductor())?;
    let star = group
        .by_label(chi.induced_from())
        .expect("induced_from label exists mod conductor")
        .clone();
    Ok((chi.conductor(), star))
}

/// Exact value of an orthogonality sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactOrthogonality {
    /// m = a mod q: the sum is phi(q).
    Phi(u64),
    /// The root-of-unity terms cancel exactly.
    Zero,
}

/// sum over chi mod q of conj(chi)(a) chi(m), float route.
pub fn orthogonality_sum(group: &CharacterGroup, a: u64, m: u64) -> Result<Complex64> {
    check_unit(group.modulus(), a)?;
    let mut acc = ComplexNeumaier::new();
    for chi in group.characters() {
        acc.add(chi.value_conj(a) * chi.value(m));
    }
    Ok(acc.value())
}

/// Exact route: the multiset of exponents of chi(m a^-1) over the dual
/// group is equidistributed over the ord(m a^-1)-th roots of unity, so
/// the sum is phi(q) [m = a] with no rounding involved.
pub fn orthogonality_sum_exact(group: &CharacterGroup, a: u64, m: u64) -> Result<ExactOrthogonality> {
    let q = group.modulus();
    check_unit(q, a)?;
    if q == 1 {
        return Ok(ExactOrthogonality::Phi(1));
    }
    if gcd(m % q, q) != 1 {
        return Ok(ExactOrthogonality::Zero);
    }
    let u = (m % q) as u128 * mod_inverse(a % q, q)? as u128 % q as u128;
    let u = u as u64;
    if u == 1 {
        return Ok(ExactOrthogonality::Phi(group.phi()));
    }
    // ord(u) in (Z/q)*.
    let mut d = 1u64;
    let mut w = u;
    while w != 1 {
        w = (w as u128 * u as u128 % q as u128) as u64;
        d += 1;
    }
    let mut counts = vec![0u64; d as usize];
    for chi in group.characters() {
        let e = chi.exponent(u).expect("u is a unit");
        // chi(u) as a d-th root: k = e * d / order, exact.
        let k = (e as u128 * d as u128 / chi.order() as u128) as u64;
        debug_assert_eq!(e as u128 * d as u128 % chi.order() as u128, 0);
        counts[(k % d) as usize] += 1;
    }
    let expected = group.phi() / d;
    assert!(
        counts.iter().all(|&c| c == expected),
        "character table inconsistency: evaluation at {} not equidistributed mod {}",
        u,
        q
    );
    Ok(ExactOrthogonality::Zero)
}

fn check_unit(q: u64, a: u64) -> Result<()> {
    let ok = if q == 1 { a == 0 } else { gcd(a % q, q) == 1 };
    if ok {
        Ok(())
    } else {
        Err(Error::BadResidue { residue: a, modulus: q })
    }
}
