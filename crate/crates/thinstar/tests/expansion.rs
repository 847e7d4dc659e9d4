//! Cross-checks of the recursion against independent computations.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use thinstar::expansion::{expand, expand_alpha1, expand_fractional, expand_with, mu_one_minus_alpha, TableProvider};
use thinstar::limit_spectrum::{solve_limit_spectrum, SecularEquation};
use thinstar::model::{
    AlphaRegime, ConstantEntry, EdgeSpec, ExponentLabel, NodeConstants, Provenance, Radius, StarGraph,
};

fn star(mass: f64) -> StarGraph {
    StarGraph::constant([1.0, 2f64.sqrt(), 3f64.sqrt()], [1.0, 0.8, 1.1], 0.2, mass).unwrap()
}

fn first_root(weights: [f64; 3], lengths: [f64; 3], beta: f64) -> f64 {
    SecularEquation::new(weights, lengths, beta).unwrap().roots(1)[0].lambda()
}

/// Moving the vertex to `x = εℓ₀` while keeping the lump `m/π` is a pure
/// edge shortening. Feeding the matching jumps and node integral to the
/// regime-One recursion must reproduce the shortening derivative.
#[test]
fn regime_one_first_correction_matches_edge_shortening() {
    let g = star(0.9);
    let ell0 = g.node.ell0;
    let m = g.node.mass_integral;
    let base = solve_limit_spectrum(&g, &AlphaRegime::One, 1).unwrap().remove(0);
    let dw = base.vertex_derivatives();
    let prov = Provenance::Config;
    let one = ExponentLabel::Pair { k: 1, p: 0 };
    let mut table = NodeConstants::default();
    for i in 1..3 {
        let d = ell0 * (dw[0] - dw[i]);
        table.delta.insert((one, i + 1), ConstantEntry { value: d, provenance: prov });
    }
    table.node_integrals.insert(one, ConstantEntry { value: m * ell0 * dw[0], provenance: prov });
    for i in 1..=3 {
        table.tails.insert((one, i), ConstantEntry { value: 0.0, provenance: prov });
    }
    let mut provider = TableProvider { constants: table, alpha: 1.0 };
    let s = expand_with(&g, &AlphaRegime::One, 1, 1, &mut provider).unwrap();
    let mu1 = s.mu_at(1.0).unwrap();

    let t = 1e-5;
    let w = g.vertex_weights();
    let l = g.lengths();
    let shorter = first_root(w, l.map(|x| x - t * ell0), m / PI);
    let longer = first_root(w, l.map(|x| x + t * ell0), m / PI);
    let derivative = (shorter - longer) / (2.0 * t);
    assert_relative_eq!(mu1, derivative, max_relative = 1e-7);
}

#[test]
fn massless_fractional_series_lives_on_the_integer_lattice() {
    let g = star(0.0);
    let s = expand_fractional(&g, &AlphaRegime::rational(1, 3).unwrap(), 1, 1).unwrap();
    for (e, mu) in s.table() {
        if e.exponent > 0.0 && e.exponent < 1.0 {
            assert_eq!(mu, 0.0, "exponent {}", e.exponent);
        }
    }
}

#[test]
fn leading_fractional_term_is_the_closed_form_for_several_modes() {
    let g = star(0.6);
    for n in 1..=4 {
        let s = expand_fractional(&g, &AlphaRegime::rational(2, 5).unwrap(), n, 1).unwrap();
        let want = mu_one_minus_alpha(&s.base, 0.6);
        assert_relative_eq!(s.mu_at(0.6).unwrap(), want, max_relative = 1e-12);
    }
}

#[test]
fn missing_constants_name_the_first_order() {
    let s = expand_alpha1(&star(0.5), 1, 2).unwrap();
    assert_eq!(s.computed(), 1);
    let err = s.require_complete().unwrap_err();
    assert!(err.to_string().contains("exponent 1"), "{err}");
}

#[test]
fn sampled_radii_stop_at_order_one() {
    let c = star(0.5);
    // flat near both ends, bulging in the middle
    let samples: Vec<f64> = (0..=40)
        .map(|j| {
            let x = j as f64 / 40.0;
            if (0.1..=0.9).contains(&x) {
                1.0 + 0.2 * (PI * (x - 0.1) / 0.8).sin()
            } else {
                1.0
            }
        })
        .collect();
    let mut edges = c.edges.clone();
    edges[0] = EdgeSpec { length: 1.0, radius: Radius::Sampled(samples) };
    let g = StarGraph::new(edges, c.node.clone()).unwrap();
    let s = expand(&g, &AlphaRegime::rational(1, 2).unwrap(), 1, 1).unwrap();
    let lead = s.mu_at(0.5).unwrap();
    assert_relative_eq!(lead, mu_one_minus_alpha(&s.base, 0.5), max_relative = 1e-6);
    assert!(expand(&g, &AlphaRegime::Zero, 1, 2).is_err());
}
