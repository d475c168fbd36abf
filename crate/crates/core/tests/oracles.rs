//! Fast paths checked against slow, independent reference computations.

use approx::assert_relative_eq;
use nalgebra::{DMatrix, SymmetricEigen};

use feature_probe_core::image_ops::*;
use feature_probe_core::numerics::*;
use feature_probe_core::oracle::*;
use feature_probe_core::rng::SplitMix64;
use feature_probe_core::sc::{self, ScParams};
use feature_probe_core::synth::{generate, SynthSpec};
use feature_probe_core::validation::sc_gt;
use feature_probe_core::{FeatureTensor, LabelMap};

fn seeded_tensor(c: usize, h: usize, w: usize, seed: u64) -> FeatureTensor {
    let mut rng = SplitMix64::new(seed);
    FeatureTensor::from_fn(c, h, w, 8, |_, _, _| rng.next_normal() as f32).unwrap()
}

fn seeded_map(h: usize, w: usize, seed: u64) -> ScalarMap {
    let mut rng = SplitMix64::new(seed);
    ScalarMap::from_fn(h, w, |_, _| rng.next_normal() as f32).unwrap()
}

fn blobs(per: usize, dim: usize, centres: &[f64], spread: f64, seed: u64) -> (PointMatrix, Vec<usize>) {
    let mut rng = SplitMix64::new(seed);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (b, c) in centres.iter().enumerate() {
        for _ in 0..per {
            for j in 0..dim {
                let offset = if j == b % dim { *c } else { 0.0 };
                data.push((offset + spread * rng.next_normal()) as f32);
            }
            labels.push(b);
        }
    }
    (PointMatrix::new(per * centres.len(), dim, data).unwrap(), labels)
}

/// Principal axes of a point set via nalgebra, oriented by the largest-magnitude entry.
fn nalgebra_pca(points: &PointMatrix, k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (n, d) = (points.n(), points.d());
    let x = DMatrix::from_fn(n, d, |i, j| points.row(i)[j] as f64);
    let mean = x.row_mean();
    let centred = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centred.transpose() * &centred / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let mut scores = vec![vec![0.0; k]; n];
    let mut values = Vec::new();
    for (slot, &j) in order.iter().take(k).enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
        let big = v.iter().copied().fold(0.0f64, |m, a| if a.abs() > m.abs() { a } else { m });
        if big < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
        }
        for (i, row) in scores.iter_mut().enumerate() {
            row[slot] = (0..d).map(|c| centred[(i, c)] * v[c]).sum();
        }
        values.push(eig.eigenvalues[j]);
    }
    (scores, values)
}

#[test]
fn pca_scores_match_eigendecomposition() {
    let mut rng = SplitMix64::new(17);
    let data: Vec<f32> = (0..15).map(|i| (rng.next_normal() * (1.0 + (i % 3) as f64)) as f32).collect();
    let points = PointMatrix::new(5, 3, data).unwrap();
    let pca = pca_project(&points, 3, 0).unwrap();
    let (scores, values) = nalgebra_pca(&points, 3);
    for (j, v) in values.iter().enumerate() {
        assert_relative_eq!(pca.explained[j], *v, max_relative = 1e-9);
    }
    for (i, row) in scores.iter().enumerate() {
        for (got, want) in pca.scores.row(i).iter().zip(row) {
            assert!((*got as f64 - want).abs() < 1e-5);
        }
    }
}

#[test]
fn isotropic_cloud_spread_is_sampling_noise() {
    // Each sample eigenvalue of 1000 identity-covariance points wanders by
    // about sqrt(2 / 1000) = 4.5%, so the max-min spread of three sits near 12%
    // and stays under 25%.
    for seed in 0..20u64 {
        let mut rng = SplitMix64::new(seed);
        let points = PointMatrix::new(1000, 3, (0..3000).map(|_| rng.next_normal() as f32).collect()).unwrap();
        let p = pca_project(&points, 3, 0).unwrap();
        let (_, values) = nalgebra_pca(&points, 3);
        for (a, b) in p.explained.iter().zip(&values) {
            assert_relative_eq!(*a, *b, max_relative = 1e-9);
        }
        assert!((p.explained[0] - p.explained[2]) / p.explained[0] < 0.25, "{:?}", p.explained);
    }
}

#[test]
fn pca1_map_matches_eigendecomposition() {
    let t = seeded_tensor(16, 8, 8, 5);
    let got = pca1_map(&t, 0).unwrap();
    let points = PointMatrix::new(64, 16, t.to_pixel_rows()).unwrap();
    let (scores, _) = nalgebra_pca(&points, 1);
    let mut proj: Vec<f64> = scores.iter().map(|r| r[0]).collect();
    let mean = channel_mean_map(&t);
    let (pm, mm) = (proj.iter().sum::<f64>() / 64.0, mean.values().iter().map(|v| *v as f64).sum::<f64>() / 64.0);
    let cov: f64 = proj.iter().zip(mean.values()).map(|(p, m)| (p - pm) * (*m as f64 - mm)).sum();
    if cov < 0.0 {
        proj.iter_mut().for_each(|p| *p = -*p);
    }
    let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (g, p) in got.map.values().iter().zip(&proj) {
        assert!((*g as f64 - (p - lo) / (hi - lo)).abs() < 1e-5);
    }
}

#[test]
fn channel_maps_match_loops() {
    let t = seeded_tensor(8, 4, 4, 9);
    let mean = channel_mean_map(&t);
    let l2 = l2_norm_map(&t);
    let mut norms = Vec::new();
    for y in 0..4 {
        for x in 0..4 {
            let mut s = 0.0;
            let mut sq = 0.0;
            for c in 0..8 {
                let v = t.get(c, y, x) as f64;
                s += v;
                sq += v * v;
            }
            assert!((mean.get(y, x) as f64 - s / 8.0).abs() < 1e-6);
            norms.push(sq.sqrt());
        }
    }
    let mu = norms.iter().sum::<f64>() / 16.0;
    let sd = (norms.iter().map(|n| (n - mu) * (n - mu)).sum::<f64>() / 16.0).sqrt();
    for (i, n) in norms.iter().enumerate() {
        assert!((l2.values()[i] as f64 - (n - mu) / sd).abs() < 1e-5);
    }
}

#[test]
fn sobel_on_ramp_and_direct_convolution() {
    let ramp = ScalarMap::from_fn(9, 9, |_, x| x as f32).unwrap();
    let g = sobel_gradient(&ramp).unwrap();
    for y in 1..8 {
        for x in 1..8 {
            assert_eq!(g.get(y, x), 8.0);
        }
    }
    let m = seeded_map(7, 6, 3);
    let (gx, gy) = sobel_components(&m).unwrap();
    let kx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let at = |y: isize, x: isize| m.get(y.clamp(0, 6) as usize, x.clamp(0, 5) as usize) as f64;
    for y in 0..7isize {
        for x in 0..6isize {
            let (mut sx, mut sy) = (0.0, 0.0);
            for (i, row) in kx.iter().enumerate() {
                for (j, k) in row.iter().enumerate() {
                    sx += k * at(y + i as isize - 1, x + j as isize - 1);
                    sy += k * at(y + j as isize - 1, x + i as isize - 1);
                }
            }
            let idx = (y * 6 + x) as usize;
            assert!((gx[idx] - sx).abs() < 1e-9 && (gy[idx] - sy).abs() < 1e-9);
        }
    }
}

#[test]
fn disc_centerlines_follow_the_circle() {
    let disc =
        generate(&SynthSpec::Disc { height: 64, width: 64, radius: 20.0, centre: None }).unwrap().into_map().unwrap();
    let mask = extract_edge_centerlines(&disc).unwrap();
    let c = 31.5;
    let mut covered = [false; 360];
    for y in 0..64 {
        for x in 0..64 {
            if mask.get(y, x) {
                let (dy, dx) = (y as f64 - c, x as f64 - c);
                let r = (dy * dy + dx * dx).sqrt();
                assert!((r - 20.0).abs() <= 1.5, "({y}, {x}) at radius {r}");
                let deg = dy.atan2(dx).to_degrees().rem_euclid(360.0) as usize % 360;
                covered[deg] = true;
            }
        }
    }
    // Arc coverage: a degree counts when a centerline pixel lies within one
    // pixel of the circle point at that angle.
    let hit = (0..360)
        .filter(|deg| {
            let a = (*deg as f64 + 0.5).to_radians();
            let (py, px) = (c + 20.0 * a.sin(), c + 20.0 * a.cos());
            (0..64).any(|y| (0..64).any(|x| mask.get(y, x) && (y as f64 - py).hypot(x as f64 - px) <= 1.0))
        })
        .count();
    assert!(hit as f64 >= 0.8 * 360.0, "{hit}");
}

fn sparse_mask(h: usize, w: usize, density: f64, seed: u64) -> Mask {
    let mut rng = SplitMix64::new(seed);
    Mask::from_fn(h, w, |_, _| rng.next_f64() < density)
}

#[test]
fn distance_transform_and_dilation_match_exhaustive_search() {
    for seed in 0..5 {
        let mask = sparse_mask(40, 33, 0.01, seed);
        let fast = distance_transform_sq(&mask);
        let slow = oracle_distance_transform(&mask).unwrap();
        assert_eq!(fast, slow);
        let dilated = dilate_disc(&mask, 3);
        for (i, d) in slow.iter().enumerate() {
            assert_eq!(dilated.bits()[i], *d <= 9.0);
        }
    }
    assert!(oracle_distance_transform(&Mask::from_fn(4, 4, |_, _| true)).unwrap().iter().all(|d| *d == 0.0));
}

#[test]
fn bands_match_distance_oracle_on_a_line() {
    let line = Mask::from_fn(30, 30, |y, x| y == 12 && (5..25).contains(&x));
    let bands = make_edge_bands(&line, 3, 7).unwrap();
    let d = oracle_distance_transform(&line).unwrap();
    for (i, dist) in d.iter().enumerate() {
        assert_eq!(bands.core.bits()[i], *dist <= 9.0);
        assert_eq!(bands.near.bits()[i], *dist > 9.0 && *dist <= 49.0);
    }
}

/// `m` times a separable Hann window written as `sin^2(pi n / N)`.
fn windowed(m: &ScalarMap) -> ScalarMap {
    let (h, w) = (m.height(), m.width());
    let win = |i: usize, n: usize| (std::f64::consts::PI * i as f64 / n as f64).sin().powi(2);
    ScalarMap::from_fn(h, w, |y, x| (m.get(y, x) as f64 * win(y, h) * win(x, w)) as f32).unwrap()
}

#[test]
fn spectrum_matches_direct_dft() {
    for seed in 0..3 {
        let m = seeded_map(32, 32, seed);
        let fast = hann_power_spectrum(&m).unwrap();
        let slow = oracle_dft_power(&windowed(&m)).unwrap();
        let scale = slow.iter().copied().fold(0.0, f64::max);
        for (a, b) in fast.power.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-4 * b.max(1e-3 * scale), "{a} vs {b}");
        }
    }
    // Non-power-of-two sides take the Bluestein path.
    let m = seeded_map(12, 20, 4);
    let fast = hann_power_spectrum(&m).unwrap();
    for (a, b) in fast.power.iter().zip(oracle_dft_power(&windowed(&m)).unwrap()) {
        assert!((a - b).abs() <= 1e-4 * (1.0 + b));
    }
}

#[test]
fn spectrum_constant_cosine_and_delta() {
    let flat = ScalarMap::from_fn(32, 32, |_, _| 1.0).unwrap();
    let p = hann_power_spectrum(&flat).unwrap();
    let low: f64 = p.power.iter().zip(&p.rho).filter(|(_, r)| **r < 2.0 / 32.0).map(|(v, _)| v).sum();
    assert!(low >= 0.999 * p.total());
    let slow = oracle_dft_power(&flat).unwrap();
    assert_relative_eq!(slow[0], 1024.0 * 1024.0, max_relative = 1e-12);
    assert!(slow[1..].iter().all(|v| *v < 1e-9));

    let cosine = generate(&SynthSpec::Sinusoid { height: 32, width: 32, freq_x: 0.25, freq_y: 0.0, phase: 0.0 })
        .unwrap()
        .into_map()
        .unwrap();
    let slow = oracle_dft_power(&windowed(&cosine)).unwrap();
    let peak = (0..slow.len()).max_by(|a, b| slow[*a].total_cmp(&slow[*b])).unwrap();
    let rho = hann_power_spectrum(&cosine).unwrap().rho[peak];
    assert!((rho - 0.25).abs() <= 1.0 / 32.0 + 1e-12);

    let delta = ScalarMap::from_fn(16, 16, |y, x| if y == 5 && x == 11 { 1.0 } else { 0.0 }).unwrap();
    let slow = oracle_dft_power(&delta).unwrap();
    assert!(slow.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn fc_on_cosines() {
    for (f, pass) in [(0.25, true), (0.05, false)] {
        let m = generate(&SynthSpec::Sinusoid { height: 64, width: 64, freq_x: f, freq_y: 0.0, phase: 0.0 })
            .unwrap()
            .into_map()
            .unwrap()
            .zscore();
        let fc = feature_probe_core::ef::fc(&m, 0.15).unwrap().value;
        if pass {
            assert!(fc >= 0.99, "{fc}");
        } else {
            assert!(fc <= 0.05, "{fc}");
        }
    }
}

fn naive_ncc(m: &ScalarMap, dx: isize, dy: isize) -> f64 {
    let (h, w) = (m.height() as isize, m.width() as isize);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let (ys, xs) = (y + dy, x + dx);
            if ys >= 0 && ys < h && xs >= 0 && xs < w {
                a.push(m.get(y as usize, x as usize) as f64);
                b.push(m.get(ys as usize, xs as usize) as f64);
            }
        }
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let num: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let da: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let db: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    if da == 0.0 || db == 0.0 {
        1.0
    } else {
        num / (da * db).sqrt()
    }
}

fn naive_shifted(m: &ScalarMap, r: usize) -> f64 {
    let d = (r as f64 / 2f64.sqrt()).round() as isize;
    let r = r as isize;
    [(r, 0), (-r, 0), (0, r), (0, -r), (d, d), (d, -d), (-d, d), (-d, -d)]
        .iter()
        .map(|&(dx, dy)| naive_ncc(m, dx, dy))
        .sum::<f64>()
        / 8.0
}

#[test]
fn shifted_ncc_matches_naive_loop() {
    let smooth = gaussian_blur(&seeded_map(24, 24, 8), 2.0);
    assert!((shifted_ncc(&smooth, 2).unwrap() - naive_shifted(&smooth, 2)).abs() < 1e-6);
}

/// Square wave of period 16 along x: repeated sharp steps.
fn stepped(h: usize, w: usize) -> ScalarMap {
    ScalarMap::from_fn(h, w, |_, x| if (x / 8) % 2 == 0 { 0.0 } else { 1.0 }).unwrap()
}

#[test]
fn sp_prefers_sharp_steps() {
    let params = feature_probe_core::ef::EfParams::default();
    let sharp_map = stepped(64, 64);
    let blurred_map = gaussian_blur(&sharp_map, 4.0);
    let sharp = feature_probe_core::ef::sp(&sharp_map.zscore(), &params, 8).unwrap();
    let soft = feature_probe_core::ef::sp(&blurred_map.zscore(), &params, 8).unwrap();
    for (m, res) in [(&sharp_map, &sharp), (&blurred_map, &soft)] {
        let z = m.zscore();
        for (r, v) in &res.curve {
            assert!((naive_shifted(&z, *r) - v).abs() < 1e-6);
        }
    }
    assert!(sharp.sp > soft.sp, "{} vs {}", sharp.sp, soft.sp);
}

#[test]
fn single_step_blur_raises_the_ncc_curve() {
    // One step spanning the map never decorrelates (vertical shifts are exact
    // copies), so both versions stop at the cap radius. Blurring still lifts
    // the naive NCC at every tested radius.
    let step = generate(&SynthSpec::StepEdge { height: 64, width: 64, column: 32 }).unwrap().into_map().unwrap();
    let blurred = gaussian_blur(&step, 4.0);
    let params = feature_probe_core::ef::EfParams::default();
    let sharp = feature_probe_core::ef::sp(&step.zscore(), &params, 8).unwrap();
    let soft = feature_probe_core::ef::sp(&blurred.zscore(), &params, 8).unwrap();
    assert!(sharp.sp >= soft.sp);
    for ((r, a), (_, b)) in sharp.curve.iter().zip(&soft.curve) {
        assert!((naive_shifted(&step.zscore(), *r) - a).abs() < 1e-6);
        assert!(a < b, "r={r}: {a} vs {b}");
    }
}

#[test]
fn kmeans_reaches_exhaustive_optimum() {
    for seed in 0..5 {
        let (points, _) = blobs(3, 2, &[0.0, 6.0, -6.0], 0.8, seed);
        let points = points.select_rows(&[0, 1, 2, 3, 4, 5, 6, 7]);
        let assign = kmeans(&points, 3, seed);
        let best = oracle_kmeans_optimum(&points, 3).unwrap();
        assert_relative_eq!(inertia(&points, &assign), best, max_relative = 1e-6);
    }
}

#[test]
fn silhouette_matches_double_loop() {
    let (points, labels) = blobs(10, 3, &[0.0, 4.0, -4.0], 1.0, 21);
    let assign = ClusterAssignment::from_labels(labels.clone(), 3);
    let fast = silhouette(&points, &assign).unwrap();
    assert!((fast - oracle_silhouette(&points, &labels).unwrap()).abs() < 1e-6);

    let two = PointMatrix::new(2, 1, vec![0.0, 1.0]).unwrap();
    assert_eq!(oracle_silhouette(&two, &[0, 1]).unwrap(), 0.0);
    let far = PointMatrix::new(4, 2, vec![0.0, 0.0, 0.05, 0.0, 100.0, 100.0, 100.0, 100.05]).unwrap();
    assert!(oracle_silhouette(&far, &[0, 0, 1, 1]).unwrap() > 0.99);
}

#[test]
fn spearman_hand_ranks() {
    // x ranks 1, 2.5, 2.5, 4; y ranks 1, 3, 2, 4.
    let rx = [1.0, 2.5, 2.5, 4.0];
    let ry = [1.0, 3.0, 2.0, 4.0];
    let mx = 2.5;
    let num: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - mx)).sum();
    let dx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let dy: f64 = ry.iter().map(|b| (b - mx) * (b - mx)).sum();
    let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((rho - num / (dx * dy).sqrt()).abs() < 1e-12);
}

#[test]
fn scs_matches_reference_pipeline() {
    // Three blobs in 8 channels, laid out as a 15x20 tensor.
    let (points, _) = blobs(100, 8, &[0.0, 5.0, -5.0], 0.7, 33);
    let t = FeatureTensor::from_fn(8, 15, 20, 8, |c, y, x| points.row(y * 20 + x)[c]).unwrap();
    let params = ScParams { k_set: vec![2, 3, 4], ..ScParams::default() };
    let (score, per_k, _) = sc::scs(&t, &params).unwrap();

    let (scores, _) = nalgebra_pca(&points, 8);
    let flat: Vec<f32> = scores.iter().flatten().map(|v| *v as f32).collect();
    let projected = PointMatrix::new(300, 8, flat).unwrap();
    let mut sil = Vec::new();
    for (i, k) in [2usize, 3, 4].iter().enumerate() {
        let assign = kmeans(&projected, *k, sc::kmeans_seed(params.seed, *k));
        let s = oracle_silhouette(&projected, &assign.labels).unwrap();
        assert!((s - per_k[i]).abs() < 1e-6, "k={k}: {s} vs {}", per_k[i]);
        sil.push(s);
    }
    sil.sort_by(f64::total_cmp);
    assert!(((sil[1] + 1.0) / 2.0 - score).abs() < 1e-6);
}

#[test]
fn sc_gt_matches_double_loop() {
    let mut rng = SplitMix64::new(77);
    let t = FeatureTensor::from_fn(4, 6, 6, 4, |c, y, _| {
        (if y < 3 { c as f64 } else { -(c as f64) } + rng.next_normal()) as f32
    })
    .unwrap();
    let labels = LabelMap::new(6, 6, (0..36).map(|i| if i < 18 { 1 } else { 2 }).collect()).unwrap();
    let got = sc_gt(&t, &labels).unwrap();
    let (mut inter, mut intra) = (0.0, 0.0);
    for c in 0..4 {
        let mut all = Vec::new();
        let mut segs: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for y in 0..6 {
            for x in 0..6 {
                let v = t.get(c, y, x) as f64;
                all.push(v);
                segs[(y >= 3) as usize].push(v);
            }
        }
        let g = all.iter().sum::<f64>() / 36.0;
        for s in &segs {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            for v in s {
                inter += (m - g) * (m - g) / 36.0;
                intra += (v - m) * (v - m) / 36.0;
            }
        }
    }
    inter /= 4.0;
    intra /= 4.0;
    assert!((got.sc_gt - inter / (inter + intra)).abs() < 1e-6);
}
