//! Markov kernels (mechanisms) as dense row-stochastic matrices.
//!
//! Row `x` of a [`Kernel`] is the output distribution `K(·|x)`. Product
//! alphabets are flattened row-major with coordinate 1 most significant, so
//! `(x_1, …, x_n)` maps to `x_1·|X|^{n−1} + … + x_n`.

use serde::{Deserialize, Serialize};

use crate::dist::{parse_csv_fields, Distribution};
use crate::error::{Error, Result};

/// Largest product alphabet [`tensor_power`] and [`product_distribution`]
/// will materialize by default.
pub const DEFAULT_TENSOR_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: Vec<Distribution>,
    output_size: usize,
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    rows: Vec<Vec<f64>>,
}

impl Kernel {
    /// Validate `rows` as a row-stochastic matrix.
    ///
    /// The error names the first offending row.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let output_size = match rows.first() {
            Some(r) => r.len(),
            None => {
                return Err(Error::InvalidKernelRow {
                    row: 0,
                    reason: "kernel has no rows".into(),
                })
            }
        };
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != output_size {
                    return Err(Error::InvalidKernelRow {
                        row: i,
                        reason: format!("has {} entries, expected {output_size}", r.len()),
                    });
                }
                Distribution::new(r).map_err(|e| Error::InvalidKernelRow {
                    row: i,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows, output_size })
    }

    pub fn from_distributions(rows: Vec<Distribution>) -> Result<Self> {
        let output_size = rows
            .first()
            .map(Distribution::alphabet_size)
            .ok_or_else(|| Error::InvalidKernelRow {
                row: 0,
                reason: "kernel has no rows".into(),
            })?;
        if let Some(i) = rows.iter().position(|r| r.alphabet_size() != output_size) {
            return Err(Error::InvalidKernelRow {
                row: i,
                reason: format!("expected {output_size} entries"),
            });
        }
        Ok(Self { rows, output_size })
    }

    pub fn identity(size: usize) -> Result<Self> {
        let rows = (0..size)
            .map(|i| Distribution::point_mass(size, i))
            .collect::<Result<Vec<_>>>()?;
        Self::from_distributions(rows)
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn entry(&self, x: usize, z: usize) -> f64 {
        self.rows[x].probs()[z]
    }

    /// Kronecker product `self ⊗ other`: independent application to the two
    /// coordinates of a pair, `self` most significant.
    pub fn kron(&self, other: &Kernel) -> Kernel {
        let rows = self
            .rows
            .iter()
            .flat_map(|a| other.rows.iter().map(move |b| a.product(b)))
            .collect();
        Kernel {
            rows,
            output_size: self.output_size * other.output_size,
        }
    }

    /// Parse a JSON object `{"rows": [[…], …]}` or CSV with one row per line.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let rows = if trimmed.starts_with('{') {
            let file: KernelFile =
                serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
            file.rows
        } else {
            trimmed
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .enumerate()
                .map(|(i, l)| {
                    parse_csv_fields(l).map_err(|e| Error::InvalidKernelRow {
                        row: i,
                        reason: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        Self::new(rows)
    }

    pub fn to_json_string(&self) -> String {
        let rows: Vec<String> = self.rows.iter().map(Distribution::to_json_string).collect();
        format!("{{\"rows\":[{}]}}", rows.join(","))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&r.to_csv_line());
            out.push('\n');
        }
        out
    }
}

impl Serialize for Kernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KernelFile {
            rows: self.rows.iter().map(|r| r.probs().to_vec()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Kernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = KernelFile::deserialize(d)?;
        Kernel::new(file.rows).map_err(serde::de::Error::custom)
    }
}

/// Output distribution `PK = Σ_x p_x K(·|x)`.
pub fn pushforward(p: &Distribution, k: &Kernel) -> Result<Distribution> {
    if p.alphabet_size() != k.input_size() {
        return Err(Error::Dimension {
            expected: k.input_size(),
            actual: p.alphabet_size(),
        });
    }
    let mut out = vec![0.0; k.output_size()];
    for (px, row) in p.probs().iter().zip(k.rows()) {
        if *px == 0.0 {
            continue;
        }
        for (o, kz) in out.iter_mut().zip(row.probs()) {
            *o += px * kz;
        }
    }
    Distribution::new(out)
}

/// Binary symmetric channel with crossover probability `omega`.
pub fn bsc(omega: f64) -> Result<Kernel> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::domain("omega", omega, "must lie in [0, 1]"));
    }
    Kernel::new(vec![vec![1.0 - omega, omega], vec![omega, 1.0 - omega]])
}

/// Crossover probability `1 / (1 + e^ε)` of binary randomized response.
pub fn rr_crossover(epsilon: f64) -> f64 {
    1.0 / (1.0 + epsilon.exp())
}

/// Binary randomized response, `BSC(1 / (1 + e^ε))`.
pub fn randomized_response(epsilon: f64) -> Result<Kernel> {
    if !(epsilon >= 0.0) {
        return Err(Error::domain("epsilon", epsilon, "must be >= 0"));
    }
    bsc(rr_crossover(epsilon))
}

/// k-ary randomized response: keep the input with probability
/// `e^ε / (k − 1 + e^ε)`, otherwise report one of the other `k − 1` symbols
/// uniformly.
pub fn k_rr(epsilon: f64, k: usize) -> Result<Kernel> {
    if !(epsilon >= 0.0) {
        return Err(Error::domain("epsilon", epsilon, "must be >= 0"));
    }
    if k < 2 {
        return Err(Error::domain("k", k as f64, "must be >= 2"));
    }
    let e = epsilon.exp();
    let denom = (k - 1) as f64 + e;
    let (keep, flip) = (e / denom, 1.0 / denom);
    let rows = (0..k)
        .map(|x| (0..k).map(|z| if z == x { keep } else { flip }).collect())
        .collect();
    Kernel::new(rows)
}

fn checked_power(base: usize, n: usize, what: &'static str, cap: usize) -> Result<()> {
    let size = (base as u128)
        .checked_pow(n.min(u32::MAX as usize) as u32)
        .unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::Capacity { what, size, cap });
    }
    Ok(())
}

/// `K^{⊗n}` with the default cap of [`DEFAULT_TENSOR_CAP`] states per side.
pub fn tensor_power(k: &Kernel, n: usize) -> Result<Kernel> {
    tensor_power_with_cap(k, n, DEFAULT_TENSOR_CAP)
}

/// `K^{⊗n}`: entry `((x_1..x_n), (z_1..z_n))` is `Π_i K(z_i|x_i)`.
pub fn tensor_power_with_cap(k: &Kernel, n: usize, cap: usize) -> Result<Kernel> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "must be >= 1"));
    }
    checked_power(k.input_size(), n, "tensor power input alphabet", cap)?;
    checked_power(k.output_size(), n, "tensor power output alphabet", cap)?;
    let mut acc = k.clone();
    for _ in 1..n {
        acc = acc.kron(k);
    }
    Ok(acc)
}

/// `P^{⊗n}` with the default cap.
pub fn product_distribution(p: &Distribution, n: usize) -> Result<Distribution> {
    product_distribution_with_cap(p, n, DEFAULT_TENSOR_CAP)
}

pub fn product_distribution_with_cap(p: &Distribution, n: usize, cap: usize) -> Result<Distribution> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "must be >= 1"));
    }
    checked_power(p.alphabet_size(), n, "product distribution alphabet", cap)?;
    let mut acc = p.clone();
    for _ in 1..n {
        acc = acc.product(p);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_kernel_close(a: &Kernel, b: &Kernel, tol: f64) {
        assert_eq!(a.input_size(), b.input_size());
        assert_eq!(a.output_size(), b.output_size());
        for x in 0..a.input_size() {
            for z in 0..a.output_size() {
                assert_abs_diff_eq!(a.entry(x, z), b.entry(x, z), epsilon = tol);
            }
        }
    }

    #[test]
    fn loader_reports_first_bad_row() {
        let err = Kernel::new(vec![vec![0.5, 0.5], vec![0.7, 0.7], vec![2.0, -1.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidKernelRow { row: 1, .. }), "{err}");
        let err = Kernel::new(vec![vec![0.5, 0.5], vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidKernelRow { row: 1, .. }));
        assert!(Kernel::new(vec![]).is_err());
        let err = Kernel::parse("0.5,0.5\n0.2,0.8\n0.1,abc\n").unwrap_err();
        assert!(matches!(err, Error::InvalidKernelRow { row: 2, .. }));
    }

    #[test]
    fn parse_json_and_csv_agree() {
        let a = Kernel::parse(r#"{"rows": [[0.75, 0.25], [0.25, 0.75]]}"#).unwrap();
        let b = Kernel::parse("0.75,0.25\n0.25,0.75\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, bsc(0.25).unwrap());
        let k = k_rr(0.3, 3).unwrap();
        assert_eq!(Kernel::parse(&k.to_json_string()).unwrap(), k);
        assert_eq!(Kernel::parse(&k.to_csv()).unwrap(), k);
        let via_serde: Kernel = serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
        assert_eq!(via_serde, k);
    }

    #[test]
    fn pushforward_through_randomized_response() {
        let eps = 0.8;
        let w = rr_crossover(eps);
        for p in [0.0, 0.2, 0.5, 1.0] {
            let out = pushforward(&Distribution::bernoulli(p).unwrap(), &randomized_response(eps).unwrap())
                .unwrap();
            let star = p * (1.0 - w) + w * (1.0 - p);
            assert_abs_diff_eq!(out.probs()[1], star, epsilon = 1e-15);
        }
    }

    #[test]
    fn pushforward_identity_and_mixing() {
        let p = Distribution::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(pushforward(&p, &Kernel::identity(2).unwrap()).unwrap(), p);
        let mixed = pushforward(&p, &bsc(0.5).unwrap()).unwrap();
        assert_eq!(mixed.probs(), &[0.5, 0.5]);
        let q = Distribution::uniform(3).unwrap();
        assert!(matches!(pushforward(&q, &bsc(0.1).unwrap()), Err(Error::Dimension { .. })));
    }

    #[test]
    fn bsc_cases() {
        assert_eq!(bsc(0.0).unwrap(), Kernel::identity(2).unwrap());
        assert_eq!(bsc(0.5).unwrap().row(1).probs(), &[0.5, 0.5]);
        assert_eq!(bsc(1.0 / (1.0 + 1f64.exp())).unwrap(), randomized_response(1.0).unwrap());
        assert!(bsc(1.5).is_err());
        assert!(bsc(-0.1).is_err());
        assert_eq!(randomized_response(0.0).unwrap(), bsc(0.5).unwrap());
        assert!(randomized_response(-1.0).is_err());
    }

    #[test]
    fn k_rr_cases() {
        for eps in [0.0, 0.5, 2.0] {
            assert_kernel_close(&k_rr(eps, 2).unwrap(), &randomized_response(eps).unwrap(), 1e-15);
        }
        let u = k_rr(0.0, 4).unwrap();
        for x in 0..4 {
            for z in 0..4 {
                assert_abs_diff_eq!(u.entry(x, z), 0.25, epsilon = 1e-16);
            }
        }
        let k = k_rr(3f64.ln(), 3).unwrap();
        assert_abs_diff_eq!(k.entry(0, 0), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(k.entry(0, 1), 0.2, epsilon = 1e-15);
        assert!(k_rr(1.0, 1).is_err());
    }

    #[test]
    fn tensor_power_cases() {
        let k = k_rr(0.4, 3).unwrap();
        assert_eq!(tensor_power(&k, 1).unwrap(), k);
        let t = tensor_power(&bsc(0.5).unwrap(), 2).unwrap();
        assert_eq!(t.input_size(), 4);
        assert!(t.rows().iter().all(|r| r.probs().iter().all(|v| *v == 0.25)));
        let t = tensor_power(&bsc(0.25).unwrap(), 2).unwrap();
        // ((0,0) -> (0,1)) is index (0, 1).
        assert_abs_diff_eq!(t.entry(0, 1), 0.1875, epsilon = 1e-16);
        assert_abs_diff_eq!(t.entry(1, 0), 0.1875, epsilon = 1e-16);
        assert_abs_diff_eq!(t.entry(0, 3), 0.0625, epsilon = 1e-16);
    }

    #[test]
    fn tensor_cap_is_enforced() {
        let k = bsc(0.1).unwrap();
        assert!(tensor_power(&k, 12).is_ok());
        match tensor_power(&k, 13) {
            Err(Error::Capacity { size, cap, .. }) => {
                assert_eq!(size, 8192);
                assert_eq!(cap, DEFAULT_TENSOR_CAP);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
        assert!(tensor_power(&k, 0).is_err());
        assert!(tensor_power_with_cap(&k, 3, 4).is_err());
        assert!(product_distribution(&Distribution::uniform(2).unwrap(), 200).is_err());
    }

    #[test]
    fn product_distribution_cases() {
        let q = 0.3;
        let p = product_distribution(&Distribution::bernoulli(q).unwrap(), 2).unwrap();
        let expected = [(1.0 - q) * (1.0 - q), (1.0 - q) * q, q * (1.0 - q), q * q];
        for (a, b) in p.probs().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-16);
        }
        let b = Distribution::bernoulli(0.7).unwrap();
        assert_eq!(product_distribution(&b, 1).unwrap(), b);
        let u = product_distribution(&Distribution::bernoulli(0.5).unwrap(), 3).unwrap();
        assert!(u.probs().iter().all(|v| *v == 0.125));
    }
}
