//! Synthetic data with known mutual information.
//!
//! Each generator returns paired features and attributes together with the
//! analytic mutual information of the construction, in nats. These are the
//! ground truth against which the neural estimator is calibrated:
//!
//! * correlated Gaussians, `MI = -ln(1 - rho^2) / 2`;
//! * a 1-D Gaussian signal planted along a random direction of a
//!   high-dimensional space, MI unchanged by the embedding;
//! * a binary symmetric channel with a small Gaussian dither,
//!   `MI = ln 2 - H_b(p_flip)`.
//!
//! A plug-in estimator over discrete count tables rounds out the toolkit
//! for cases where the joint distribution can be tabulated.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{AttributeKind, AttributeVector, FeatureMatrix};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::prng;

/// Standard deviation of the dither added to binary channel features so
/// the feature distribution has a density.
const CHANNEL_DITHER_STD: f64 = 0.05;

/// Draws `n` samples of a 1-D standard Gaussian feature and an attribute
/// with correlation `rho`, returning `(F, A, true_mi)` where
/// `true_mi = -ln(1 - rho^2) / 2`.
pub fn gen_correlated_gaussian(
    n: usize,
    rho: f64,
    seed: u64,
) -> Result<(FeatureMatrix, AttributeVector, f64)> {
    check_rho(rho)?;
    check_n(n)?;
    let mut rng = prng(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut features = Vec::with_capacity(n);
    let mut attrs = Vec::with_capacity(n);
    let ortho = (1.0 - rho * rho).sqrt();
    for _ in 0..n {
        let z1: f64 = normal.sample(&mut rng);
        let z2: f64 = normal.sample(&mut rng);
        features.push(z1);
        attrs.push(rho * z1 + ortho * z2);
    }
    let f = FeatureMatrix::new(
        Matrix::from_vec(n, 1, features)?,
        format!("gaussian(rho={rho})"),
    )?;
    let a = AttributeVector::new("attr", AttributeKind::Continuous, attrs, "standard")?;
    Ok((f, a, gaussian_mi(rho)))
}

/// Plants the correlated-Gaussian pair inside `m` dimensions: the signal
/// varies along a random unit direction and all orthogonal variation is
/// independent isotropic Gaussian noise, so the mutual information with the
/// attribute is exactly the 1-D closed form.
///
/// With `m = 1` this delegates to [`gen_correlated_gaussian`].
pub fn gen_embedded_signal(
    n: usize,
    m: usize,
    rho: f64,
    seed: u64,
) -> Result<(FeatureMatrix, AttributeVector, f64)> {
    check_rho(rho)?;
    check_n(n)?;
    if m == 0 {
        return Err(Error::Parameter(
            "embedding dimension must be at least 1".into(),
        ));
    }
    if m == 1 {
        return gen_correlated_gaussian(n, rho, seed);
    }

    let mut rng = prng(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut signal = Vec::with_capacity(n);
    let mut attrs = Vec::with_capacity(n);
    let ortho = (1.0 - rho * rho).sqrt();
    for _ in 0..n {
        let z1: f64 = normal.sample(&mut rng);
        let z2: f64 = normal.sample(&mut rng);
        signal.push(z1);
        attrs.push(rho * z1 + ortho * z2);
    }

    // Random unit direction; a zero draw has probability zero but would
    // poison the normalization, so redraw defensively.
    let mut direction = vec![0.0; m];
    loop {
        for d in &mut direction {
            *d = normal.sample(&mut rng);
        }
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for d in &mut direction {
                *d /= norm;
            }
            break;
        }
    }

    let mut data = vec![0.0; n * m];
    let mut noise = vec![0.0; m];
    for (i, s) in signal.iter().enumerate() {
        for e in &mut noise {
            *e = normal.sample(&mut rng);
        }
        let along: f64 = noise.iter().zip(&direction).map(|(g, u)| g * u).sum();
        let row = &mut data[i * m..(i + 1) * m];
        for ((x, g), u) in row.iter_mut().zip(&noise).zip(&direction) {
            *x = s * u + (g - along * u);
        }
    }
    let f = FeatureMatrix::new(
        Matrix::from_vec(n, m, data)?,
        format!("embedded(m={m},rho={rho})"),
    )?;
    let a = AttributeVector::new("attr", AttributeKind::Continuous, attrs, "standard")?;
    Ok((f, a, gaussian_mi(rho)))
}

/// Draws a fair binary attribute and a feature that transmits it through a
/// symmetric channel: the bit is flipped with probability `p_flip`, encoded
/// as 0/1, and dithered with `N(0, 0.05^2)` noise. The dither gives the
/// feature a density while costing a negligible amount of the channel's
/// information, so `true_mi = ln 2 - H_b(p_flip)` with `H_b` the binary
/// entropy in nats.
pub fn gen_binary_channel(
    n: usize,
    p_flip: f64,
    seed: u64,
) -> Result<(FeatureMatrix, AttributeVector, f64)> {
    if !(0.0..=0.5).contains(&p_flip) {
        return Err(Error::Parameter(format!(
            "flip probability must lie in [0, 0.5], got {p_flip}"
        )));
    }
    check_n(n)?;
    let mut rng = prng(seed);
    let normal = Normal::new(0.0, CHANNEL_DITHER_STD).expect("dither normal");
    let mut features = Vec::with_capacity(n);
    let mut attrs = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.gen_bool(0.5);
        let flip = rng.gen_bool(p_flip);
        let transmitted = if flip { !a } else { a };
        let dither: f64 = normal.sample(&mut rng);
        attrs.push(if a { 1.0 } else { 0.0 });
        features.push(if transmitted { 1.0 } else { 0.0 } + dither);
    }
    let f = FeatureMatrix::new(
        Matrix::from_vec(n, 1, features)?,
        format!("channel(p={p_flip})"),
    )?;
    let a = AttributeVector::new("attr", AttributeKind::Binary, attrs, "{0,1}")?;
    Ok((f, a, (2.0f64).ln() - binary_entropy(p_flip)))
}

/// Mutual information of the correlated-Gaussian construction.
pub fn gaussian_mi(rho: f64) -> f64 {
    let mi = -0.5 * (1.0 - rho * rho).ln();
    // rho = 0 lands on -0.0; report the independent case as plain zero.
    if mi == 0.0 {
        0.0
    } else {
        mi
    }
}

/// Binary entropy in nats, with `H_b(0) = H_b(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

/// Plug-in mutual information of a 2-D count table, in nats.
///
/// Rows index one variable, columns the other. The table must be
/// rectangular with a positive total. Cells with zero count contribute
/// nothing. Terms are accumulated in sorted order, which makes the result
/// exactly symmetric under transposition.
pub fn brute_force_mi_discrete(counts: &[Vec<u64>]) -> Result<f64> {
    if counts.is_empty() || counts[0].is_empty() {
        return Err(Error::Dimension("count table must be non-empty".into()));
    }
    let cols = counts[0].len();
    for (i, row) in counts.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Dimension(format!(
                "count table is ragged: row {} has {} columns, row 0 has {}",
                i,
                row.len(),
                cols
            )));
        }
    }
    let total: u64 = counts.iter().flatten().sum();
    if total == 0 {
        return Err(Error::Data("count table sums to zero".into()));
    }
    let n = total as f64;
    let row_sums: Vec<f64> = counts
        .iter()
        .map(|row| row.iter().sum::<u64>() as f64)
        .collect();
    let mut col_sums = vec![0.0; cols];
    for row in counts {
        for (s, c) in col_sums.iter_mut().zip(row) {
            *s += *c as f64;
        }
    }

    let mut terms = Vec::new();
    for (row, r) in counts.iter().zip(&row_sums) {
        for (c, s) in row.iter().zip(&col_sums) {
            if *c > 0 {
                let c = *c as f64;
                terms.push((c / n) * ((c * n) / (r * s)).ln());
            }
        }
    }
    terms.sort_by(f64::total_cmp);
    Ok(terms.into_iter().sum())
}

fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::Parameter(format!(
            "correlation must satisfy |rho| < 1, got {rho}"
        )));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "sample count must be at least 2, got {n}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn correlation(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for (a, b) in x.iter().zip(y) {
            cov += (a - mx) * (b - my);
            vx += (a - mx) * (a - mx);
            vy += (b - my) * (b - my);
        }
        cov / (vx.sqrt() * vy.sqrt())
    }

    #[test]
    fn gaussian_mi_matches_the_closed_form_values() {
        assert_eq!(gaussian_mi(0.0), 0.0);
        assert!(gaussian_mi(0.0).is_sign_positive());
        assert!((gaussian_mi(0.8) - 0.510_825_623_765_990_8).abs() < 1e-12);
        assert!((gaussian_mi(0.3) - 0.047_155_339_735_620_645).abs() < 1e-12);
        assert!((gaussian_mi(0.6) - 0.223_143_551_314_209_74).abs() < 1e-12);
        assert!((gaussian_mi(0.9) - 0.830_365_603_410_825_5).abs() < 1e-12);
    }

    #[test]
    fn correlated_gaussian_samples_have_the_requested_correlation() {
        let n = 20_000;
        let (f, a, mi) = gen_correlated_gaussian(n, 0.8, 5).unwrap();
        assert_eq!((f.n(), f.m()), (n, 1));
        let feats: Vec<f64> = f.values().data().to_vec();
        let r = correlation(&feats, a.values());
        assert!((r - 0.8).abs() < 3.0 / (n as f64).sqrt(), "r = {r}");
        assert!((mi - gaussian_mi(0.8)).abs() < 1e-15);
    }

    #[test]
    fn generators_are_deterministic_per_seed() {
        let (f1, a1, _) = gen_correlated_gaussian(100, 0.5, 3).unwrap();
        let (f2, a2, _) = gen_correlated_gaussian(100, 0.5, 3).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(a1, a2);
        let (f3, _, _) = gen_correlated_gaussian(100, 0.5, 4).unwrap();
        assert_ne!(f1, f3);
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        assert!(matches!(
            gen_correlated_gaussian(10, 1.0, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            gen_correlated_gaussian(10, -1.5, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            gen_embedded_signal(10, 0, 0.5, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            gen_binary_channel(10, 0.6, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            gen_binary_channel(10, -0.1, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            gen_correlated_gaussian(1, 0.5, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn embedded_signal_keeps_the_planted_correlation_along_its_direction() {
        let n = 8_000;
        let m = 64;
        let (f, a, mi) = gen_embedded_signal(n, m, 0.8, 11).unwrap();
        assert_eq!((f.n(), f.m()), (n, m));
        assert!((mi - gaussian_mi(0.8)).abs() < 1e-15);

        // Recover the planted direction from the covariance with the
        // attribute: E[F a] = rho * u up to sampling noise.
        let mut cov = vec![0.0; m];
        for i in 0..n {
            let row = f.values().row(i);
            for (c, x) in cov.iter_mut().zip(row) {
                *c += x * a.values()[i];
            }
        }
        let norm = cov.iter().map(|c| c * c).sum::<f64>().sqrt();
        for c in &mut cov {
            *c /= norm;
        }
        let projected: Vec<f64> = (0..n)
            .map(|i| {
                f.values()
                    .row(i)
                    .iter()
                    .zip(&cov)
                    .map(|(x, u)| x * u)
                    .sum()
            })
            .collect();
        let r = correlation(&projected, a.values());
        assert!((r - 0.8).abs() < 3.0 / (n as f64).sqrt(), "r = {r}");
    }

    #[test]
    fn embedded_signal_with_one_dimension_reduces_to_the_plain_generator() {
        let (f1, a1, mi1) = gen_embedded_signal(500, 1, 0.7, 21).unwrap();
        let (f2, a2, mi2) = gen_correlated_gaussian(500, 0.7, 21).unwrap();
        assert_eq!(f1.values(), f2.values());
        assert_eq!(a1, a2);
        assert_eq!(mi1, mi2);
    }

    #[test]
    fn binary_channel_mi_matches_the_entropy_formula() {
        let (_, _, mi0) = gen_binary_channel(10, 0.5, 0).unwrap();
        assert!(mi0.abs() < 1e-15);
        let (_, _, mi_clean) = gen_binary_channel(10, 0.0, 0).unwrap();
        assert!((mi_clean - (2.0f64).ln()).abs() < 1e-15);
        let (_, a, mi) = gen_binary_channel(10, 0.1, 0).unwrap();
        // ln 2 - H_b(0.1), computed independently.
        let expect = (2.0f64).ln() - (-(0.1f64.ln()) * 0.1 - 0.9f64.ln() * 0.9);
        assert!((mi - expect).abs() < 1e-12);
        assert!((mi - 0.368_064_207_168_497_1).abs() < 1e-12);
        assert_eq!(a.kind, AttributeKind::Binary);
    }

    #[test]
    fn binary_channel_attributes_are_exactly_zero_or_one_and_balanced() {
        let (f, a, _) = gen_binary_channel(20_000, 0.1, 31).unwrap();
        assert!(a.values().iter().all(|v| *v == 0.0 || *v == 1.0));
        let ones: f64 = a.values().iter().sum();
        assert!((ones / 20_000.0 - 0.5).abs() < 0.02);
        // Features cluster near 0 and 1 with the dither's spread.
        assert!(f.values().data().iter().all(|v| (-0.5..1.5).contains(v)));
    }

    #[test]
    fn plug_in_mi_of_a_diagonal_table_is_ln_2() {
        let mi = brute_force_mi_discrete(&[vec![5, 0], vec![0, 5]]).unwrap();
        assert!((mi - (2.0f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn plug_in_mi_of_an_independent_table_is_zero() {
        let mi = brute_force_mi_discrete(&[vec![4, 4], vec![4, 4]]).unwrap();
        assert_eq!(mi, 0.0);
    }

    #[test]
    fn plug_in_mi_is_exactly_transpose_symmetric() {
        let table = vec![vec![7, 2, 1], vec![0, 5, 3]];
        let transposed = vec![vec![7, 0], vec![2, 5], vec![1, 3]];
        let a = brute_force_mi_discrete(&table).unwrap();
        let b = brute_force_mi_discrete(&transposed).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn plug_in_mi_rejects_bad_tables() {
        assert!(matches!(
            brute_force_mi_discrete(&[]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            brute_force_mi_discrete(&[vec![1, 2], vec![3]]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            brute_force_mi_discrete(&[vec![0, 0], vec![0, 0]]),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn plug_in_mi_never_exceeds_either_marginal_entropy() {
        let entropy = |probs: &[f64]| -> f64 {
            probs
                .iter()
                .filter(|p| **p > 0.0)
                .map(|p| -p * p.ln())
                .sum()
        };
        let tables = [
            vec![vec![9, 1], vec![2, 8]],
            vec![vec![1, 2, 3], vec![6, 5, 4]],
            vec![vec![10, 0, 0], vec![0, 10, 0], vec![0, 0, 10]],
        ];
        for table in &tables {
            let mi = brute_force_mi_discrete(table).unwrap();
            let n: u64 = table.iter().flatten().sum();
            let rows: Vec<f64> = table
                .iter()
                .map(|r| r.iter().sum::<u64>() as f64 / n as f64)
                .collect();
            let mut cols = vec![0.0; table[0].len()];
            for row in table {
                for (c, v) in cols.iter_mut().zip(row) {
                    *c += *v as f64 / n as f64;
                }
            }
            assert!(mi <= entropy(&rows).min(entropy(&cols)) + 1e-12);
            assert!(mi >= 0.0);
        }
    }

    /// The dither costs only a sliver of the channel's information: a fine
    /// discretization of the dithered feature against the attribute must
    /// recover nearly all of `ln 2 - H_b(p)`.
    #[test]
    fn dither_information_loss_is_negligible() {
        let n = 200_000;
        let p = 0.1;
        let (f, a, true_mi) = gen_binary_channel(n, p, 41).unwrap();
        let bins = 200;
        let (lo, hi) = (-0.5, 1.5);
        let mut table = vec![vec![0u64; bins]; 2];
        for i in 0..n {
            let x = f.values().get(i, 0);
            let bin = (((x - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1);
            let row = if a.values()[i] == 1.0 { 1 } else { 0 };
            table[row][bin] += 1;
        }
        let discretized = brute_force_mi_discrete(&table).unwrap();
        assert!(
            (discretized - true_mi).abs() < 0.02,
            "plug-in {discretized} vs analytic {true_mi}"
        );
    }
}
