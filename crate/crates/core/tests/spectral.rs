mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schelling_core::spectral::DEFAULT_K;
use schelling_core::{ase_embed, singular_values, zhu_ghodsi_dim, Network, SingularProfile};

use common::{
    dense_adjacency, direct_argmax, direct_loglik, disjoint_union, reference_eigenvalues,
    reference_singular_values,
};

fn permuted(net: &Network, rng: &mut ChaCha8Rng) -> Network {
    let mut perm: Vec<usize> = (0..net.n()).collect();
    perm.shuffle(rng);
    let edges: Vec<_> = net
        .edges()
        .into_iter()
        .map(|(a, b)| (perm[a], perm[b]))
        .collect();
    Network::from_edges(net.n(), &edges).unwrap()
}

fn clique(n: usize) -> Network {
    let edges: Vec<_> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    Network::from_edges(n, &edges).unwrap()
}

#[test]
fn matches_dense_reference_on_small_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let n = rng.gen_range(3..=64);
        let m = rng.gen_range(0..=n * (n - 1) / 2);
        let net = Network::random_edges(n, m, &mut rng).unwrap();
        let reference = reference_singular_values(&net);
        let k = rng.gen_range(2..=n);
        let got = singular_values(&net, k).unwrap();
        for (a, b) in got.values().iter().zip(&reference) {
            assert!((a - b).abs() <= 1e-8 * n as f64, "n={n} m={m}: {a} vs {b}");
        }
    }
}

#[test]
fn dense_random_graph_top_value_and_dimension() {
    let net = Network::random(1000, 80, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    let p = singular_values(&net, DEFAULT_K).unwrap();
    assert!((p.values()[0] - 80.0).abs() <= 3.0, "{}", p.values()[0]);
    let reference = reference_singular_values(&net);
    for (a, b) in p.values().iter().zip(&reference) {
        assert!((a - b).abs() <= 1e-8 * 1000.0);
    }
    assert_eq!(zhu_ghodsi_dim(&p).unwrap().d_hat, 1);
}

#[test]
fn two_blocks_have_dimension_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = Network::random(500, 40, &mut rng).unwrap();
    let b = Network::random(500, 40, &mut rng).unwrap();
    assert_eq!(a.edge_count(), 10_000);
    let net = disjoint_union(&a, &b);
    let p = singular_values(&net, DEFAULT_K).unwrap();
    assert_eq!(zhu_ghodsi_dim(&p).unwrap().d_hat, 2);
}

#[test]
fn full_rank_embedding_reproduces_absolute_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [5, 12, 25] {
        let net = Network::random_edges(n, n * (n - 1) / 4, &mut rng).unwrap();
        let x = ase_embed(&net, n).unwrap();
        let g = DMatrix::from_fn(n, n, |i, j| x.gram(i, j));
        let mut gram_eigs: Vec<f64> = g
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        gram_eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let eig = reference_eigenvalues(&net);
        let mut abs: Vec<f64> = eig.iter().map(|v| v.abs()).collect();
        abs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in gram_eigs.iter().zip(&abs) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        // A - XX^T = U (Lambda - |Lambda|) U^T, nonzero only through negative eigenvalues
        let a = DMatrix::from_row_slice(n, n, &dense_adjacency(&net));
        let err = (a - g).norm_squared();
        let expected: f64 = eig
            .iter()
            .filter(|v| **v < 0.0)
            .map(|v| (2.0 * v).powi(2))
            .sum();
        assert!(
            (err - expected).abs() < 1e-7 * expected.max(1.0),
            "{err} vs {expected}"
        );
    }
}

#[test]
fn bridged_cliques_split_on_second_coordinate() {
    let mut net = disjoint_union(&clique(10), &clique(10));
    net.add_edge(0, 10);
    let x = ase_embed(&net, 2).unwrap();
    let second = x.column(1);
    let sign_a = second[0].signum();
    assert!(sign_a != 0.0);
    for (i, v) in second.iter().enumerate() {
        let expected = if i < 10 { sign_a } else { -sign_a };
        assert_eq!(v.signum(), expected, "agent {i}: {v}");
    }
}

#[test]
fn disjoint_cliques_embed_as_two_points() {
    let net = disjoint_union(&clique(12), &clique(8));
    let x = ase_embed(&net, 2).unwrap();
    for i in 0..20 {
        let rep = if i < 12 { 0 } else { 12 };
        for (a, b) in x.row(i).iter().zip(x.row(rep)) {
            assert!((a - b).abs() < 1e-9);
        }
    }
    let (p, q) = (x.row(0), x.row(12));
    let gap = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    assert!(gap > 1.0);
    assert!((x.eigenvalues[0] - 11.0).abs() < 1e-9 && (x.eigenvalues[1] - 7.0).abs() < 1e-9);
}

#[test]
fn leading_coordinate_has_one_sign() {
    let net = Network::random(300, 30, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
    let x = ase_embed(&net, 1).unwrap();
    assert!(x.column(0).iter().all(|v| *v > 0.0));
}

fn synthetic_profile() -> impl Strategy<Value = Vec<f64>> {
    (3usize..60, 1usize..4, 1.0f64..50.0, any::<u64>()).prop_map(|(k, lead, gap, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..k)
            .map(|i| {
                let base = if i < lead.min(k - 1) { gap } else { 0.0 };
                base + rng.gen_range(0.0..10.0)
            })
            .collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn elbow_matches_direct_evaluation(v in synthetic_profile()) {
        let est = zhu_ghodsi_dim(&SingularProfile::new(v.clone(), v.len()).unwrap()).unwrap();
        prop_assert_eq!(est.profile_loglik.len(), v.len() - 1);
        for d in 1..v.len() {
            let direct = direct_loglik(&v, d);
            let got = est.profile_loglik[d - 1];
            prop_assert!(got.is_finite());
            prop_assert!((got - direct).abs() <= 1e-9 * direct.abs().max(1.0), "d={} {} vs {}", d, got, direct);
        }
        prop_assert_eq!(est.d_hat, direct_argmax(&v));
    }
}

proptest! {
    #[test]
    fn elbow_is_scale_covariant(v in synthetic_profile(), e in -8i32..8) {
        let c = 2f64.powi(e);
        let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
        let a = zhu_ghodsi_dim(&SingularProfile::new(v.clone(), v.len()).unwrap()).unwrap();
        let b = zhu_ghodsi_dim(&SingularProfile::new(scaled, v.len()).unwrap()).unwrap();
        prop_assert_eq!(a.d_hat, b.d_hat);
    }

    #[test]
    fn relabelling_leaves_profile_unchanged(seed in any::<u64>(), n in 10usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(n..=n * (n - 1) / 3);
        let net = Network::random_edges(n, m, &mut rng).unwrap();
        let other = permuted(&net, &mut rng);
        let k = n.min(20);
        let a = singular_values(&net, k).unwrap();
        let b = singular_values(&other, k).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < 1e-8 * n as f64);
        }
        // d_hat from the dense reference of each, so tiny rounding cannot flip a near-tie
        let ra = SingularProfile::new(reference_singular_values(&net)[..k].to_vec(), n).unwrap();
        let rb = SingularProfile::new(reference_singular_values(&other)[..k].to_vec(), n).unwrap();
        prop_assert_eq!(zhu_ghodsi_dim(&ra).unwrap().d_hat, zhu_ghodsi_dim(&rb).unwrap().d_hat);
    }

    #[test]
    fn union_spectrum_is_merged_multiset(seed in any::<u64>(), n1 in 2usize..25, n2 in 2usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Network::random_edges(n1, rng.gen_range(0..=n1 * (n1 - 1) / 2), &mut rng).unwrap();
        let b = Network::random_edges(n2, rng.gen_range(0..=n2 * (n2 - 1) / 2), &mut rng).unwrap();
        let u = disjoint_union(&a, &b);
        let mut merged: Vec<f64> = singular_values(&a, n1).unwrap().values().to_vec();
        merged.extend_from_slice(singular_values(&b, n2).unwrap().values());
        merged.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let whole = singular_values(&u, n1 + n2).unwrap();
        for (x, y) in whole.values().iter().zip(&merged) {
            prop_assert!((x - y).abs() < 1e-8 * (n1 + n2) as f64, "{} vs {}", x, y);
        }
    }
}

#[test]
fn full_size_graphs_match_dense_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let blocks = disjoint_union(
        &Network::random(500, 40, &mut rng).unwrap(),
        &Network::random(500, 40, &mut rng).unwrap(),
    );
    for net in [
        Network::random_initiated(1000, 80, &mut rng).unwrap(),
        Network::random(1000, 80, &mut rng).unwrap(),
        blocks,
    ] {
        let reference = reference_singular_values(&net);
        let got = singular_values(&net, DEFAULT_K).unwrap();
        for (a, b) in got.values().iter().zip(&reference) {
            assert!((a - b).abs() <= 1e-8 * net.n() as f64, "{a} vs {b}");
        }
    }
}
