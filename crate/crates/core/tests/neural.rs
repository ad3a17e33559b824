mod common;

use common::*;
use nodeclass::neural::{
    fold_stacked, gcn_layer, normalize_adjacency, train_combined, train_ffn, train_gcn, unstack,
    Activation, AdjacencyMode, Architecture, Inputs, ModelSpec, Network, NormalizedAdjacency,
};
use nodeclass::{DenseMatrix, DirectedGraph, SplitMask};
use nodeclass_oracles::check_gradient;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
const MAX_RELATIVE: f64 = 1e-4;

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect(),
    )
    .unwrap()
}

struct Instance {
    adj_sym: NormalizedAdjacency,
    adj_asym: NormalizedAdjacency,
    x: DenseMatrix,
    external: DenseMatrix,
    labels: Vec<usize>,
    train: Vec<usize>,
}

fn instance(seed: u64, n: usize) -> Instance {
    let g = random_digraph(seed, n, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Instance {
        adj_sym: normalize_adjacency(&g, AdjacencyMode::Symmetric),
        adj_asym: normalize_adjacency(&g, AdjacencyMode::Asymmetric),
        x: random_matrix(n, 5, &mut rng),
        external: random_matrix(n, 7, &mut rng),
        labels: (0..n).map(|_| rng.random_range(0..3)).collect(),
        train: (0..n).filter(|i| i % 3 != 1).collect(),
    }
}

impl Instance {
    fn inputs(&self, arch: Architecture) -> Inputs<'_> {
        match arch {
            Architecture::Ffn => Inputs::dense(&self.x),
            Architecture::GcnSym => Inputs::graph(&self.adj_sym, &self.x),
            Architecture::GcnAsym => Inputs::graph(&self.adj_asym, &self.x),
            Architecture::GcnCombined => Inputs::combined(&self.adj_asym, &self.x, &self.external),
        }
    }
}

/// Worst relative error of the analytic gradient against central
/// differences on `coords` (all parameters when `None`).
fn gradient_check(
    net: &Network,
    inputs: &Inputs,
    labels: &[usize],
    rows: &[usize],
    l2: f64,
    coords: Option<&[usize]>,
) -> f64 {
    let (_, grad) = net
        .loss_and_gradient(inputs, labels, rows, l2, None)
        .unwrap();
    let base = net.parameters();
    let all: Vec<usize> = (0..base.len()).collect();
    let mut probe = net.clone();
    let mut loss = |p: &[f64]| {
        probe.set_parameters(p);
        probe
            .loss_and_gradient(inputs, labels, rows, l2, None)
            .unwrap()
            .0
    };
    let check = check_gradient(
        &mut loss,
        &base,
        &grad,
        coords.unwrap_or(&all),
        STEP,
        MAX_RELATIVE,
    );
    assert!(
        check.noise_failures.is_empty(),
        "{:?}",
        check.noise_failures
    );
    check.worst_relative
}

fn small_spec(arch: Architecture, bias: bool) -> ModelSpec {
    ModelSpec {
        hidden: vec![6, 4],
        external_hidden: 3,
        dropout: 0.0,
        l2: 0.01,
        bias,
        ..ModelSpec::for_architecture(arch)
    }
}

#[test]
fn every_architecture_passes_finite_differences() {
    for arch in [
        Architecture::Ffn,
        Architecture::GcnSym,
        Architecture::GcnAsym,
        Architecture::GcnCombined,
    ] {
        for bias in [false, true] {
            for (seed, n) in [(1, 8), (2, 9), (3, 10)] {
                let inst = instance(seed, n);
                let spec = small_spec(arch, bias);
                let inputs = inst.inputs(arch);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let net =
                    Network::new(&spec, inst.x.cols(), inst.external.cols(), 3, &mut rng).unwrap();
                let worst = gradient_check(&net, &inputs, &inst.labels, &inst.train, spec.l2, None);
                assert!(
                    worst < MAX_RELATIVE,
                    "{arch:?} bias={bias} n={n}: relative error {worst}"
                );
            }
        }
    }
}

#[test]
fn default_widths_pass_sampled_finite_differences() {
    for arch in [
        Architecture::Ffn,
        Architecture::GcnSym,
        Architecture::GcnAsym,
        Architecture::GcnCombined,
    ] {
        let inst = instance(11, 10);
        let spec = ModelSpec {
            dropout: 0.0,
            ..ModelSpec::for_architecture(arch)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Network::new(&spec, inst.x.cols(), inst.external.cols(), 3, &mut rng).unwrap();
        let coords: Vec<usize> = (0..400)
            .map(|_| rng.random_range(0..net.n_parameters()))
            .collect();
        let worst = gradient_check(
            &net,
            &inst.inputs(arch),
            &inst.labels,
            &inst.train,
            spec.l2,
            Some(&coords),
        );
        assert!(worst < MAX_RELATIVE, "{arch:?}: relative error {worst}");
    }
}

#[test]
fn layer_matches_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for s in 0..20 {
        let g = random_digraph(s, 8, 15);
        let n = g.n_nodes();
        let x = random_matrix(n, 4, &mut rng);
        let w = random_matrix(4, 3, &mut rng);
        for mode in [AdjacencyMode::Symmetric, AdjacencyMode::Asymmetric] {
            let adj = normalize_adjacency(&g, mode);
            let ops: Vec<DenseMatrix> = match mode {
                AdjacencyMode::Symmetric => vec![adj.fwd().to_dense()],
                AdjacencyMode::Asymmetric => {
                    vec![adj.fwd().to_dense(), adj.bwd().unwrap().to_dense()]
                }
            };
            let out = gcn_layer(&adj, &x, &w, Activation::Relu).unwrap();
            assert_eq!(out.rows(), n * ops.len());
            for (b, s_mat) in ops.iter().enumerate() {
                for i in 0..n {
                    for o in 0..3 {
                        let mut acc = 0.0;
                        for j in 0..n {
                            for k in 0..4 {
                                acc += s_mat[(i, j)] * x[(j, k)] * w[(k, o)];
                            }
                        }
                        assert!((out[(b * n + i, o)] - acc.max(0.0)).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

/// Dense `D^{-1/2} M D^{-1/2}` with `D` the row sums of `M`.
fn normalized_oracle(m: &DenseMatrix) -> DenseMatrix {
    let n = m.rows();
    let d: Vec<f64> = (0..n).map(|i| m.row(i).iter().sum::<f64>()).collect();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = m[(i, j)] / (d[i].sqrt() * d[j].sqrt());
        }
    }
    out
}

#[test]
fn normalization_matches_dense_formula() {
    for s in 0..30 {
        let g = random_digraph(s, 8, 20);
        let n = g.n_nodes();
        let mut a = DenseMatrix::zeros(n, n);
        for (u, v) in g.edges() {
            a[(u, v)] = 1.0;
        }
        let eye = DenseMatrix::identity(n);
        let mut sym = a.clone();
        sym.add_assign(&a.transpose());
        sym.add_assign(&eye);
        let mut fwd = a.clone();
        fwd.add_assign(&eye);
        let mut bwd = a.transpose();
        bwd.add_assign(&eye);

        let s_adj = normalize_adjacency(&g, AdjacencyMode::Symmetric)
            .fwd()
            .to_dense();
        let asym = normalize_adjacency(&g, AdjacencyMode::Asymmetric);
        for (got, expect) in [
            (s_adj.clone(), normalized_oracle(&sym)),
            (asym.fwd().to_dense(), normalized_oracle(&fwd)),
            (asym.bwd().unwrap().to_dense(), normalized_oracle(&bwd)),
        ] {
            for (x, y) in got.data().iter().zip(expect.data()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
        assert_eq!(s_adj, s_adj.transpose());
    }
}

#[test]
fn symmetric_operator_has_spectral_radius_at_most_one() {
    for s in 0..30 {
        let g = random_digraph(s, 8, 20);
        let adj = normalize_adjacency(&g, AdjacencyMode::Symmetric);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut v = random_matrix(g.n_nodes(), 1, &mut rng);
        let mut estimate = 0.0;
        for _ in 0..500 {
            let w = adj.fwd().matmul_dense(&v).unwrap();
            let norm = w.sum_squares().sqrt();
            estimate = norm / v.sum_squares().sqrt();
            v = w.map(|x| x / norm);
        }
        assert!(estimate <= 1.0 + 1e-9, "graph {s}: {estimate}");
    }
}

#[test]
fn fold_matches_index_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_matrix(4, 2, &mut rng);
    let f = fold_stacked(&x).unwrap();
    assert_eq!(f.shape(), (2, 4));
    for i in 0..2 {
        for j in 0..4 {
            let expect = if j < 2 { x[(i, j)] } else { x[(2 + i, j - 2)] };
            assert_eq!(f[(i, j)], expect);
        }
    }
}

fn all_train(n: usize) -> SplitMask {
    SplitMask::from_train(n, &(0..n).collect::<Vec<_>>(), 0, 1.0)
}

#[test]
fn graph_free_convolution_is_logistic_regression() {
    let inst = instance(4, 10);
    let empty = DirectedGraph::from_edge_list(10, &[]);
    let adj = normalize_adjacency(&empty, AdjacencyMode::Symmetric);
    let mask = all_train(10);
    let gcn = ModelSpec {
        hidden: vec![],
        ..ModelSpec::gcn_sym()
    };
    let ffn = ModelSpec {
        architecture: Architecture::Ffn,
        ..gcn.clone()
    };
    let a = train_gcn(&adj, &inst.x, &inst.labels, &mask, &gcn).unwrap();
    let b = train_ffn(&inst.x, &inst.labels, &mask, &ffn).unwrap();
    assert_eq!(a.network.parameters(), b.network.parameters());
    assert_eq!(a.loss_trace, b.loss_trace);
}

#[test]
fn combined_without_topology_is_a_two_stage_stacked_network() {
    let inst = instance(6, 10);
    let mask = SplitMask::from_train(10, &inst.train, 0, 0.6);
    let empty_topology = DenseMatrix::zeros(10, 0);
    let combined = ModelSpec {
        external_hidden: 5,
        hidden: vec![4],
        ..ModelSpec::gcn_combined()
    };
    let stacked = ModelSpec {
        architecture: Architecture::GcnAsym,
        hidden: vec![5, 4],
        ..combined.clone()
    };
    let a = train_combined(
        &inst.adj_asym,
        &empty_topology,
        &inst.external,
        &inst.labels,
        &mask,
        &combined,
    )
    .unwrap();
    let b = train_gcn(
        &inst.adj_asym,
        &inst.external,
        &inst.labels,
        &mask,
        &stacked,
    )
    .unwrap();
    assert_eq!(a.network.parameters(), b.network.parameters());
    assert_eq!(a.loss_trace, b.loss_trace);
}

#[test]
fn zero_width_is_rejected() {
    let inst = instance(6, 10);
    let mask = all_train(10);
    let spec = ModelSpec {
        external_hidden: 0,
        ..ModelSpec::gcn_combined()
    };
    assert!(train_combined(
        &inst.adj_asym,
        &inst.x,
        &inst.external,
        &inst.labels,
        &mask,
        &spec
    )
    .is_err());
}

#[test]
fn uniform_logits_give_uniform_posteriors() {
    let inst = instance(7, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut net = Network::new(&ModelSpec::gcn_asym(), 5, 0, 3, &mut rng).unwrap();
    net.set_parameters(&vec![0.0; net.n_parameters()]);
    let p = net.predict(&inst.inputs(Architecture::GcnAsym)).unwrap();
    assert!(p.data().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
}

#[test]
fn training_loss_decreases_for_every_architecture() {
    let inst = instance(8, 10);
    let mask = SplitMask::from_train(10, &inst.train, 0, 0.6);
    for arch in [
        Architecture::Ffn,
        Architecture::GcnSym,
        Architecture::GcnAsym,
        Architecture::GcnCombined,
    ] {
        let mean_trace = |epoch: usize| -> f64 {
            (0..5)
                .map(|seed| {
                    let spec = ModelSpec::for_architecture(arch).with_seed(seed);
                    let m = match arch {
                        Architecture::Ffn => train_ffn(&inst.x, &inst.labels, &mask, &spec),
                        Architecture::GcnSym => {
                            train_gcn(&inst.adj_sym, &inst.x, &inst.labels, &mask, &spec)
                        }
                        Architecture::GcnAsym => {
                            train_gcn(&inst.adj_asym, &inst.x, &inst.labels, &mask, &spec)
                        }
                        Architecture::GcnCombined => train_combined(
                            &inst.adj_asym,
                            &inst.x,
                            &inst.external,
                            &inst.labels,
                            &mask,
                            &spec,
                        ),
                    }
                    .unwrap();
                    assert_eq!(m.loss_trace.len(), spec.epochs);
                    m.loss_trace[epoch]
                })
                .sum::<f64>()
                / 5.0
        };
        assert!(mean_trace(199) < mean_trace(0), "{arch:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fold_and_unstack_are_inverse(rows in 1usize..6, cols in 1usize..5, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_matrix(2 * rows, cols, &mut rng);
        prop_assert_eq!(unstack(&fold_stacked(&x).unwrap()).unwrap(), x.clone());
        let y = random_matrix(rows, 2 * cols, &mut rng);
        prop_assert_eq!(fold_stacked(&unstack(&y).unwrap()).unwrap(), y);
    }

    #[test]
    fn posteriors_are_normalized_and_repeatable(seed in 0u64..1000) {
        let inst = instance(seed, 9);
        for arch in [Architecture::Ffn, Architecture::GcnSym, Architecture::GcnAsym, Architecture::GcnCombined] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = Network::new(&ModelSpec::for_architecture(arch), 5, 7, 3, &mut rng).unwrap();
            let p = net.predict(&inst.inputs(arch)).unwrap();
            for i in 0..p.rows() {
                prop_assert!((p.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            prop_assert_eq!(p, net.predict(&inst.inputs(arch)).unwrap());
        }
    }

    #[test]
    fn relabeling_permutes_posteriors(seed in 0u64..1000) {
        let g = random_digraph(seed, 10, 10);
        let n = g.n_nodes();
        let perm = permutation(n, seed + 1);
        let mut inverse = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            inverse[new] = old;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_matrix(n, 5, &mut rng);
        let e = random_matrix(n, 7, &mut rng);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let train: Vec<usize> = (0..n).filter(|i| i % 2 == 0).collect();
        let mask = SplitMask::from_train(n, &train, 0, 0.5);

        let pg = g.permute(&perm);
        let (px, pe) = (x.select_rows(&inverse), e.select_rows(&inverse));
        let plabels: Vec<usize> = inverse.iter().map(|&u| labels[u]).collect();
        let pmask = mask.permute(&perm);

        let spec = ModelSpec { dropout: 0.0, epochs: 30, ..ModelSpec::gcn_combined() };
        let adj = normalize_adjacency(&g, AdjacencyMode::Asymmetric);
        let padj = normalize_adjacency(&pg, AdjacencyMode::Asymmetric);
        let a = train_combined(&adj, &x, &e, &labels, &mask, &spec).unwrap();
        let b = train_combined(&padj, &px, &pe, &plabels, &pmask, &spec).unwrap();
        let pa = a.predict(&Inputs::combined(&adj, &x, &e)).unwrap();
        let pb = b.predict(&Inputs::combined(&padj, &px, &pe)).unwrap();
        prop_assert_eq!(pa.cols(), pb.cols());
        for u in 0..n {
            for c in 0..pa.cols() {
                prop_assert!((pa[(u, c)] - pb[(perm[u], c)]).abs() < 1e-9);
            }
        }
    }
}
