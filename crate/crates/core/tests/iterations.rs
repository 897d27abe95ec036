//! Iteration counts per scale against their closed forms.
//!
//! `p_t` starts at `D·w_max` and drops by exactly `δ_i` per iteration. The
//! first scale stops at `D·w_max/2`, every rescale lifts `p_t` by
//! `2D·δ_i`, and the last scale runs down to zero.

use cflow::instances::{random_linear, InstanceParams};
use cflow::solver::scaling_flow;

fn expected(depth: u64, eps_inv: u64, scales: u32) -> Vec<u64> {
    if scales == 0 {
        return vec![depth * eps_inv];
    }
    (0..=scales)
        .map(|i| match i {
            0 => depth * eps_inv / 2,
            i if i == scales => depth * eps_inv + 2 * depth,
            _ => depth * eps_inv / 2 + 2 * depth,
        })
        .collect()
}

#[test]
fn scale_iterations_match_closed_form() {
    for eps_inv in [16u64, 32] {
        for seed in 0..100 {
            let net = random_linear(seed, &InstanceParams::default());
            let r = scaling_flow(&net, 1.0 / eps_inv as f64).unwrap();
            let want = expected(u64::from(net.depth()), eps_inv, r.grid.scales());
            assert_eq!(r.scale_iterations, want, "seed {seed}, eps 1/{eps_inv}");
        }
    }
}

#[test]
fn scale_count_is_log_of_band_ratio() {
    for seed in 0..100 {
        let net = random_linear(seed, &InstanceParams::signed());
        let (lo, hi) = net.gradient_band();
        let r = scaling_flow(&net, 1.0 / 16.0).unwrap();
        assert_eq!(r.grid.scales(), (hi / lo).log2().ceil() as u32);
        assert_eq!(r.scale_iterations.len() as u32, r.grid.scales() + 1);
    }
}

#[test]
fn hand_instance_counts() {
    // D = 2, ε = 1/16, band (1, 8): T = 3.
    let net = cflow::network::parse_network(
        "net 3 3\ne s a 1 lin 8\ne a t 1 lin 1\ne s t 1 lin 2\n",
    )
    .unwrap();
    let r = scaling_flow(&net, 1.0 / 16.0).unwrap();
    assert_eq!(r.scale_iterations, vec![16, 20, 20, 36]);
}
