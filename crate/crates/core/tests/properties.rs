use std::path::Path;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use ipld::io::{parse_edge_list, parse_edge_list_str};
use ipld::linalg::SpdFactor;
use ipld::model::{BlockCoupling, CompositeTerm};
use ipld::scalar::{in_lemma4_region, omega, omega_star};

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

proptest! {
    #[test]
    fn omega_below_conjugate(tau in 1e-6..0.999f64) {
        prop_assert!(omega(tau) <= omega_star(tau).unwrap());
    }

    #[test]
    fn local_cauchy_schwarz(u in vec_of(4), v in vec_of(4), m in vec_of(16)) {
        let b = DMatrix::from_vec(4, 4, m);
        let h = &b * b.transpose() + DMatrix::identity(4, 4) * 0.1;
        let f = SpdFactor::new(&h).unwrap();
        let (u, v) = (DVector::from_vec(u), DVector::from_vec(v));
        let primal = (u.transpose() * &h * &u)[0].sqrt();
        let dual = v.dot(&f.solve(&v)).sqrt();
        prop_assert!(u.dot(&v) <= primal * dual * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn prox_matches_moreau_projection(v in vec_of(5), lo in vec_of(5), width in prop::collection::vec(0.0..3.0f64, 5), step in 1e-3..10.0f64) {
        let hi: Vec<f64> = lo.iter().zip(&width).map(|(l, w)| l + w).collect();
        let phi = CompositeTerm::interval(lo, hi).unwrap();
        let v = DVector::from_vec(v);
        let p = phi.prox(&v, step);
        let q = &v + phi.project(&(-&v / step)) * step;
        prop_assert!((p - q).amax() <= 1e-12 * (1.0 + v.amax()));
    }

    #[test]
    fn coupling_adjoint(x in vec_of(3), y in vec_of(6), m in vec_of(12)) {
        let local = DMatrix::from_vec(4, 3, m);
        let rows = [0usize, 2, 3, 5];
        let triplets: Vec<_> = (0..4).flat_map(|k| (0..3).map(move |j| (k, j))).map(|(k, j)| (rows[k], j, local[(k, j)])).collect();
        let a = BlockCoupling::from_triplets(6, 3, &triplets).unwrap();
        let (x, y) = (DVector::from_vec(x), DVector::from_vec(y));
        let mut ax = DVector::zeros(6);
        a.add_apply(&x, &mut ax);
        let lhs = ax.dot(&y);
        let rhs = x.dot(&a.transpose_apply(&y));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn region_membership_implies_bound(a in 0.01..0.6f64, frac in 0.01..0.99f64, u in 0.0..20.0f64, v in 0.0..20.0f64) {
        let b = (1.0 - a) * frac * 0.99;
        if in_lemma4_region(a, b, u, v) {
            let bound = (a + b) / (1.0 - a - b);
            prop_assert!(u <= bound * (1.0 + 1e-12) && v <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn edge_list_round_trip(edges in prop::collection::vec((0usize..30, 0usize..30), 1..60), one_based in any::<bool>()) {
        let shift = usize::from(one_based);
        let text: String = edges.iter().map(|(u, v)| format!("{} {}\n", u + shift, v + shift)).collect();
        let net = parse_edge_list_str(&text).unwrap();
        let mut expect: Vec<_> = edges.iter().filter(|(u, v)| u != v).map(|&(u, v)| (u.min(v), u.max(v))).collect();
        expect.sort_unstable();
        expect.dedup();
        let base = if one_based {
            0
        } else {
            edges.iter().filter(|(u, v)| u != v).map(|&(u, v)| u.min(v)).min().map_or(0, |m| usize::from(m >= 1))
        };
        let got: Vec<_> = net.edges().iter().map(|&(u, v)| (u + base, v + base)).collect();
        prop_assert_eq!(got, expect);
    }
}

#[test]
fn fixture_edge_list_counts() {
    let net = parse_edge_list(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/fixture_edges.txt")).unwrap();
    assert_eq!(net.n_nodes(), 40);
    assert_eq!(net.edges().len(), 87);
    assert_eq!(net.neighbors(0).len(), 3);
}
