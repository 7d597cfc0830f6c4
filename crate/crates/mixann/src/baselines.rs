//! Classical oversamplers for horizontal comparison: random averaging,
//! SMOTE, Borderline-SMOTE (variant 1), ADASYN with largest-remainder
//! allocation, and an entropy-weighted mixer that blends minorities with
//! majorities under a skewed Beta ratio.
//!
//! Where the underlying methods leave constants unstated, this module fixes
//! canonical choices and documents them on the functions. All generators are
//! deterministic per request seed and always return exactly `n_synthetic`
//! samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::classifiers::Classifier;
use crate::data::{choose, Dataset, LabeledSample, MAJORITY, MINORITY};
use crate::error::{Error, Result};
use crate::mixup;
use crate::neighbors::NeighborIndex;

/// How many synthetics to make and how wide a neighborhood to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OversampleRequest {
    pub n_synthetic: usize,
    pub k_neighbors: usize,
    pub seed: u64,
}

impl OversampleRequest {
    pub fn new(n_synthetic: usize, k_neighbors: usize, seed: u64) -> Self {
        Self { n_synthetic, k_neighbors, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_synthetic == 0 {
            return Err(Error::InvalidConfig("n_synthetic must be at least 1".into()));
        }
        if self.k_neighbors == 0 {
            return Err(Error::InvalidConfig("k_neighbors must be at least 1".into()));
        }
        Ok(())
    }
}

/// Safety category of a minority sample, judged by the majority fraction
/// among its nearest neighbors over the whole training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SafetyClass {
    /// Fewer than half the neighbors are majority.
    Safe,
    /// At least half but not all neighbors are majority.
    Danger,
    /// Every neighbor is majority.
    Noise,
}

/// One SMOTE-style draw with its provenance, kept visible so neighbor
/// selection can be audited.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoteDraw {
    /// Row index of the base sample in `train`.
    pub base: usize,
    /// Row index of the chosen minority neighbor in `train`.
    pub neighbor: usize,
    /// Interpolation position in [0, 1) along base -> neighbor.
    pub ratio: f64,
    pub sample: LabeledSample,
}

fn minority_rows(train: &Dataset) -> Result<Vec<usize>> {
    let rows = train.indices_with_label(MINORITY);
    if rows.len() < 2 {
        return Err(Error::TooFewMinority(rows.len()));
    }
    Ok(rows)
}

/// Index over minority samples only; positions map back through `rows`.
fn minority_index(train: &Dataset, rows: &[usize]) -> Result<NeighborIndex> {
    NeighborIndex::build(
        rows.iter()
            .map(|&i| train.samples()[i].features.clone())
            .collect(),
        vec![MINORITY; rows.len()],
    )
}

/// The k nearest minority neighbors of `rows[position]`, excluding itself,
/// as positions into `rows`.
fn minority_neighbors(index: &NeighborIndex, position: usize, k: usize) -> Result<Vec<usize>> {
    let neighbors = index.k_nearest(index.point(position), k + 1)?;
    Ok(neighbors
        .into_iter()
        .map(|(i, _)| i)
        .filter(|&i| i != position)
        .take(k)
        .collect())
}

/// Each synthetic is the plain average of two distinct, uniformly drawn
/// minority samples, labeled minority.
pub fn random_oversample(train: &Dataset, req: &OversampleRequest) -> Result<Vec<LabeledSample>> {
    req.validate()?;
    let rows = minority_rows(train)?;
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut out = Vec::with_capacity(req.n_synthetic);
    for _ in 0..req.n_synthetic {
        let a = rng.random_range(0..rows.len());
        let mut b = rng.random_range(0..rows.len() - 1);
        if b >= a {
            b += 1;
        }
        let xa = &train.samples()[rows[a]].features;
        let xb = &train.samples()[rows[b]].features;
        let features = xa.iter().zip(xb).map(|(p, q)| (p + q) / 2.0).collect();
        out.push(LabeledSample { features, label: MINORITY });
    }
    Ok(out)
}

/// SMOTE with full provenance: base and neighbor are uniform draws, the
/// interpolation ratio is uniform in [0, 1).
pub fn smote_draws(train: &Dataset, req: &OversampleRequest) -> Result<Vec<SmoteDraw>> {
    req.validate()?;
    let rows = minority_rows(train)?;
    let index = minority_index(train, &rows)?;
    let k = req.k_neighbors.min(rows.len() - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut out = Vec::with_capacity(req.n_synthetic);
    for _ in 0..req.n_synthetic {
        let base_pos = rng.random_range(0..rows.len());
        out.push(draw_from_base(train, &rows, &index, base_pos, k, &mut rng)?);
    }
    Ok(out)
}

fn draw_from_base(
    train: &Dataset,
    rows: &[usize],
    index: &NeighborIndex,
    base_pos: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SmoteDraw> {
    let neighbors = minority_neighbors(index, base_pos, k)?;
    let neighbor_pos = *choose(&neighbors, rng);
    let ratio: f64 = rng.random_range(0.0..1.0);
    let base_features = &train.samples()[rows[base_pos]].features;
    let neighbor_features = &train.samples()[rows[neighbor_pos]].features;
    let features = base_features
        .iter()
        .zip(neighbor_features)
        .map(|(x, nb)| x + ratio * (nb - x))
        .collect();
    Ok(SmoteDraw {
        base: rows[base_pos],
        neighbor: rows[neighbor_pos],
        ratio,
        sample: LabeledSample { features, label: MINORITY },
    })
}

/// Linear interpolation between minority samples and their nearest minority
/// neighbors.
pub fn smote(train: &Dataset, req: &OversampleRequest) -> Result<Vec<LabeledSample>> {
    Ok(smote_draws(train, req)?.into_iter().map(|d| d.sample).collect())
}

/// Classifies every minority sample by the majority fraction among its
/// `k_neighbors` nearest samples over the whole training set (the sample
/// itself excluded). Returned in the order of `train`'s minority rows.
pub fn borderline_classify(train: &Dataset, k_neighbors: usize) -> Result<Vec<SafetyClass>> {
    let rows = minority_rows(train)?;
    let whole = NeighborIndex::from_dataset(train)?;
    let k = k_neighbors.min(train.len() - 1);
    let mut classes = Vec::with_capacity(rows.len());
    for &row in &rows {
        let neighbors = whole.k_nearest(&train.samples()[row].features, k + 1)?;
        let picked: Vec<usize> = neighbors
            .into_iter()
            .map(|(i, _)| i)
            .filter(|&i| i != row)
            .take(k)
            .collect();
        let majority = picked.iter().filter(|&&i| whole.label(i) == MAJORITY).count();
        let fraction = majority as f64 / picked.len() as f64;
        classes.push(if fraction < 0.5 {
            SafetyClass::Safe
        } else if fraction < 1.0 {
            SafetyClass::Danger
        } else {
            SafetyClass::Noise
        });
    }
    Ok(classes)
}

/// Borderline-SMOTE (variant 1): only DANGER minorities serve as base
/// points; neighbors still come from all minorities. Falls back to plain
/// SMOTE with a warning when no minority sits in the danger zone.
pub fn borderline_smote(train: &Dataset, req: &OversampleRequest) -> Result<Vec<LabeledSample>> {
    req.validate()?;
    let rows = minority_rows(train)?;
    let classes = borderline_classify(train, req.k_neighbors)?;
    let danger_positions: Vec<usize> = (0..rows.len())
        .filter(|&p| classes[p] == SafetyClass::Danger)
        .collect();
    if danger_positions.is_empty() {
        log::warn!("no borderline minorities found; falling back to plain SMOTE");
        return smote(train, req);
    }
    let index = minority_index(train, &rows)?;
    let k = req.k_neighbors.min(rows.len() - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut out = Vec::with_capacity(req.n_synthetic);
    for _ in 0..req.n_synthetic {
        let base_pos = *choose(&danger_positions, &mut rng);
        out.push(draw_from_base(train, &rows, &index, base_pos, k, &mut rng)?.sample);
    }
    Ok(out)
}

/// Per-minority synthetic counts: weights are the majority fraction in each
/// minority's neighborhood, normalized, then rounded with largest-remainder
/// correction so the counts sum exactly to `n_synthetic`. A flat allocation
/// is used when every weight is zero.
pub fn adasyn_allocations(train: &Dataset, req: &OversampleRequest) -> Result<Vec<usize>> {
    req.validate()?;
    let rows = minority_rows(train)?;
    let whole = NeighborIndex::from_dataset(train)?;
    let k = req.k_neighbors.min(train.len() - 1);
    let mut weights = Vec::with_capacity(rows.len());
    for &row in &rows {
        let neighbors = whole.k_nearest(&train.samples()[row].features, k + 1)?;
        let picked: Vec<usize> = neighbors
            .into_iter()
            .map(|(i, _)| i)
            .filter(|&i| i != row)
            .take(k)
            .collect();
        let majority = picked.iter().filter(|&&i| whole.label(i) == MAJORITY).count();
        weights.push(majority as f64 / picked.len() as f64);
    }
    Ok(crate::data::largest_remainder(&weights, req.n_synthetic))
}

/// ADASYN: SMOTE-style generation with per-base counts from
/// [`adasyn_allocations`].
pub fn adasyn(train: &Dataset, req: &OversampleRequest) -> Result<Vec<LabeledSample>> {
    let allocations = adasyn_allocations(train, req)?;
    let rows = minority_rows(train)?;
    let index = minority_index(train, &rows)?;
    let k = req.k_neighbors.min(rows.len() - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut out = Vec::with_capacity(req.n_synthetic);
    for (base_pos, &count) in allocations.iter().enumerate() {
        for _ in 0..count {
            out.push(draw_from_base(train, &rows, &index, base_pos, k, &mut rng)?.sample);
        }
    }
    Ok(out)
}

/// Entropy-weighted mixer: the minority base is drawn with probability
/// proportional to the classifier's prediction entropy at that sample
/// (uniform when all entropies vanish), the partner is a uniform majority,
/// and the mix ratio follows Beta(2, 5) — skewed toward the majority end.
/// Labels follow the hard-label rule with `label_threshold`.
pub fn mixboost<C: Classifier + ?Sized>(
    train: &Dataset,
    classifier: &C,
    req: &OversampleRequest,
    label_threshold: f64,
) -> Result<Vec<LabeledSample>> {
    req.validate()?;
    if !train.has_both_classes() {
        return Err(Error::SingleClassData);
    }
    let minority: Vec<usize> = train.indices_with_label(MINORITY);
    let majority: Vec<usize> = train.indices_with_label(MAJORITY);

    let mut entropies = Vec::with_capacity(minority.len());
    for &row in &minority {
        let p = classifier.predict_proba(&train.samples()[row].features)?;
        entropies.push(binary_entropy(p));
    }
    let total: f64 = entropies.iter().sum();
    let weights: Vec<f64> = if total > 0.0 {
        entropies
    } else {
        vec![1.0; minority.len()]
    };
    let cumulative: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let weight_sum = *cumulative.last().expect("at least one minority");

    let ratio_dist = Beta::new(2.0, 5.0).expect("valid Beta parameters");
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut out = Vec::with_capacity(req.n_synthetic);
    for _ in 0..req.n_synthetic {
        let pick = rng.random_range(0.0..weight_sum);
        let base_pos = cumulative.partition_point(|&c| c <= pick).min(minority.len() - 1);
        let base = &train.samples()[minority[base_pos]];
        let partner = &train.samples()[*choose(&majority, &mut rng)];
        let ratio: f64 = ratio_dist.sample(&mut rng);
        let features = mixup::mix_features(&base.features, &partner.features, ratio)?;
        let label = mixup::mix_label(base.label, partner.label, ratio, label_threshold);
        out.push(LabeledSample { features, label });
    }
    Ok(out)
}

fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.ln() };
    term(p) + term(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_toy;
    use crate::neighbors::squared_distance;

    fn sample(features: Vec<f64>, label: u8) -> LabeledSample {
        LabeledSample { features, label }
    }

    fn two_minority_dataset() -> Dataset {
        Dataset::new(vec![
            sample(vec![5.0, 5.0], 0),
            sample(vec![0.0, 0.0], 1),
            sample(vec![2.0, 2.0], 1),
        ])
        .unwrap()
    }

    /// A scripted classifier returning a fixed probability everywhere.
    struct ConstantProba(f64);

    impl Classifier for ConstantProba {
        fn predict_proba(&self, _x: &[f64]) -> Result<f64> {
            Ok(self.0)
        }
        fn update(&mut self, _new: &[LabeledSample]) -> Result<()> {
            Ok(())
        }
        fn pool_len(&self) -> usize {
            0
        }
    }

    #[test]
    fn random_oversample_single_pair_is_midpoint() {
        let req = OversampleRequest::new(6, 5, 0);
        let out = random_oversample(&two_minority_dataset(), &req).unwrap();
        assert_eq!(out.len(), 6);
        for s in &out {
            assert_eq!(s.features, vec![1.0, 1.0]);
            assert_eq!(s.label, MINORITY);
        }
    }

    #[test]
    fn random_oversample_needs_two_minorities() {
        let ds = Dataset::new(vec![sample(vec![0.0], 0), sample(vec![1.0], 1)]).unwrap();
        assert!(matches!(
            random_oversample(&ds, &OversampleRequest::new(1, 5, 0)).unwrap_err(),
            Error::TooFewMinority(1)
        ));
    }

    #[test]
    fn smote_stays_on_segments() {
        let req = OversampleRequest::new(20, 1, 3);
        let out = smote(&two_minority_dataset(), &req).unwrap();
        assert_eq!(out.len(), 20);
        for s in &out {
            // Segment between (0,0) and (2,2).
            assert!((s.features[0] - s.features[1]).abs() < 1e-12);
            assert!((0.0..2.0).contains(&s.features[0]));
            assert_eq!(s.label, MINORITY);
        }
    }

    #[test]
    fn smote_is_seed_deterministic() {
        let ds = make_toy(40, 12, 3, 1.0, 1).unwrap();
        let req = OversampleRequest::new(15, 5, 42);
        assert_eq!(smote(&ds, &req).unwrap(), smote(&ds, &req).unwrap());
    }

    #[test]
    fn smote_neighbors_match_brute_force() {
        let mut seed_rng = ChaCha8Rng::seed_from_u64(404);
        for round in 0..50 {
            let ds = make_toy(
                20 + round % 13,
                6 + round % 9,
                1 + round % 3,
                1.0,
                seed_rng.random(),
            )
            .unwrap();
            let req = OversampleRequest::new(10, 3, seed_rng.random());
            let draws = smote_draws(&ds, &req).unwrap();
            let minorities = ds.indices_with_label(MINORITY);
            for draw in draws {
                // Brute-force k nearest minorities of the base, self excluded.
                let base = &ds.samples()[draw.base].features;
                let mut ranked: Vec<(usize, f64)> = minorities
                    .iter()
                    .filter(|&&r| r != draw.base)
                    .map(|&r| (r, squared_distance(base, &ds.samples()[r].features)))
                    .collect();
                ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                let k = req.k_neighbors.min(minorities.len() - 1);
                let allowed: Vec<usize> = ranked.iter().take(k).map(|&(r, _)| r).collect();
                assert!(
                    allowed.contains(&draw.neighbor),
                    "neighbor {} not among brute-force {:?}",
                    draw.neighbor,
                    allowed
                );
            }
        }
    }

    #[test]
    fn borderline_noise_points_are_never_bases() {
        // One minority stranded among majorities is NOISE; the minorities
        // near the mixed region are DANGER and the only legal bases.
        let samples = vec![
            sample(vec![0.0, 0.0], 0),
            sample(vec![0.2, 0.0], 0),
            sample(vec![0.0, 0.2], 0),
            sample(vec![0.2, 0.2], 0),
            sample(vec![0.1, 0.1], 1), // stranded: all 3 neighbors majority
            sample(vec![5.0, 5.0], 1),
            sample(vec![5.2, 5.0], 1),
            sample(vec![5.0, 5.2], 1),
            sample(vec![5.1, 5.1], 0),
            sample(vec![4.9, 5.1], 0),
        ];
        let ds = Dataset::new(samples).unwrap();
        let classes = borderline_classify(&ds, 3).unwrap();
        assert_eq!(classes[0], SafetyClass::Noise);
        let req = OversampleRequest::new(30, 3, 7);
        let out = borderline_smote(&ds, &req).unwrap();
        // Bases are only the (5, 5)-cluster minorities; interpolating from
        // them toward any minority neighbor cannot reach x near 0 unless the
        // stranded point had been a base.
        for s in &out {
            assert!(s.features[0] > 0.2, "synthetic {:?} traces back to the noise point", s.features);
        }
    }

    #[test]
    fn borderline_falls_back_when_no_danger() {
        // Minorities isolated in their own tight cluster: all SAFE.
        let mut samples = Vec::new();
        for i in 0..6 {
            samples.push(sample(vec![i as f64 * 0.1, 0.0], 1));
        }
        for i in 0..6 {
            samples.push(sample(vec![50.0 + i as f64, 0.0], 0));
        }
        let ds = Dataset::new(samples).unwrap();
        let classes = borderline_classify(&ds, 3).unwrap();
        assert!(classes.iter().all(|&c| c == SafetyClass::Safe));
        let req = OversampleRequest::new(9, 3, 0);
        let fallback = borderline_smote(&ds, &req).unwrap();
        assert_eq!(fallback, smote(&ds, &req).unwrap());
    }

    #[test]
    fn adasyn_allocations_sum_to_request() {
        let ds = make_toy(60, 15, 3, 1.0, 5).unwrap();
        let req = OversampleRequest::new(37, 5, 9);
        let alloc = adasyn_allocations(&ds, &req).unwrap();
        assert_eq!(alloc.iter().sum::<usize>(), 37);
        let out = adasyn(&ds, &req).unwrap();
        assert_eq!(out.len(), 37);
    }

    #[test]
    fn adasyn_equal_neighborhoods_get_equal_allocations() {
        // Two symmetric minorities straddle a majority cluster.
        let ds = Dataset::new(vec![
            sample(vec![-0.1, 0.0], 0),
            sample(vec![0.1, 0.0], 0),
            sample(vec![0.0, 0.1], 0),
            sample(vec![0.0, -0.1], 0),
            sample(vec![-1.0, 0.0], 1),
            sample(vec![1.0, 0.0], 1),
        ])
        .unwrap();
        let req = OversampleRequest::new(10, 3, 0);
        let alloc = adasyn_allocations(&ds, &req).unwrap();
        assert!((alloc[0] as i64 - alloc[1] as i64).abs() <= 1, "alloc {alloc:?}");
    }

    #[test]
    fn mixboost_uniform_when_entropies_are_flat() {
        let ds = make_toy(40, 10, 2, 1.0, 6).unwrap();
        let req = OversampleRequest::new(200, 5, 13);
        // Flat at 0.5 and degenerate at 0/1 must both fall back to uniform
        // base sampling; with identical rng streams the outputs coincide.
        let flat = mixboost(&ds, &ConstantProba(0.5), &req, 0.3).unwrap();
        let degenerate = mixboost(&ds, &ConstantProba(1.0), &req, 0.3).unwrap();
        assert_eq!(flat, degenerate);
        assert_eq!(flat.len(), 200);
    }

    #[test]
    fn mixboost_labels_follow_the_ratio_rule() {
        let ds = two_minority_dataset();
        let req = OversampleRequest::new(200, 5, 3);
        let out = mixboost(&ds, &ConstantProba(0.5), &req, 0.3).unwrap();
        assert_eq!(out.len(), 200);
        // Beta(2,5) straddles 0.3, so both labels must appear.
        assert!(out.iter().any(|s| s.label == MINORITY));
        assert!(out.iter().any(|s| s.label == MAJORITY));
    }

    #[test]
    fn mixboost_rejects_single_class() {
        let ds = Dataset::new(vec![sample(vec![0.0], 1), sample(vec![1.0], 1)]).unwrap();
        assert!(matches!(
            mixboost(&ds, &ConstantProba(0.5), &OversampleRequest::new(1, 5, 0), 0.3).unwrap_err(),
            Error::SingleClassData
        ));
    }

    #[test]
    fn all_oversamplers_hit_the_requested_count() {
        let ds = make_toy(50, 12, 2, 1.0, 17).unwrap();
        let req = OversampleRequest::new(23, 5, 29);
        assert_eq!(random_oversample(&ds, &req).unwrap().len(), 23);
        assert_eq!(smote(&ds, &req).unwrap().len(), 23);
        assert_eq!(borderline_smote(&ds, &req).unwrap().len(), 23);
        assert_eq!(adasyn(&ds, &req).unwrap().len(), 23);
        assert_eq!(mixboost(&ds, &ConstantProba(0.4), &req, 0.3).unwrap().len(), 23);
    }

    #[test]
    fn zero_request_is_invalid() {
        let ds = two_minority_dataset();
        assert!(matches!(
            random_oversample(&ds, &OversampleRequest::new(0, 5, 0)).unwrap_err(),
            Error::InvalidConfig(_)
        ));
    }
}
