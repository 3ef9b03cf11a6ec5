use std::collections::BTreeSet;

use proptest::prelude::*;
use rooflens_core::bounds::{
    kernel_speedup_ceiling, min_temporal_depth, overlapped_total, tensor_core_ceiling,
    unoverlapped_speedup, workload_ceiling,
};
use rooflens_core::hardware::{builtin_specs, machine_balance, tensor_alpha};
use rooflens_core::kernels::{
    gemv_model, spmv_csr_model, spmv_generic_model, stencil_model, Intensity,
};
use rooflens_core::matrix::parse_stats_str;
use rooflens_core::roofline::{attainable, classify, ridge_point};
use rooflens_core::{
    Boundedness, ExecutionUnit, HardwareSpec, Precision, SparseMatrixStats, SparseMetadataTraffic,
    StencilShape, TimeBreakdown,
};

const CC: ExecutionUnit = ExecutionUnit::CudaCore;
const TC: ExecutionUnit = ExecutionUnit::TensorCore;
const FP64: Precision = Precision::FP64;

fn spec(bw: f64, cc: f64, tc: f64) -> HardwareSpec {
    HardwareSpec::new("prop", bw, 1 << 20, [((CC, FP64), cc), ((TC, FP64), tc)]).unwrap()
}

fn precision() -> impl Strategy<Value = Precision> {
    prop_oneof![
        Just(Precision::FP64),
        Just(Precision::FP32),
        Just(Precision::FP16)
    ]
}

fn stats() -> impl Strategy<Value = SparseMatrixStats> {
    (1u64..100_000, 1u64..100_000)
        .prop_flat_map(|(m, n)| (Just(m), Just(n), 1u64..=(m * n).min(10_000_000)))
        .prop_map(|(m, n, nnz)| SparseMatrixStats::new(m, n, nnz).unwrap())
}

#[test]
fn builtin_alpha_exceeds_one() {
    for s in builtin_specs() {
        assert!(tensor_alpha(&s, FP64).unwrap() > 1.0, "{}", s.name());
    }
}

proptest! {
    #[test]
    fn balance_is_homogeneous(c in 1e-3f64..1e3, bw in 1e11f64..1e13, p in 1e12f64..1e14) {
        let a = spec(bw, p, 2.0 * p);
        let b = spec(bw * c, p * c, 2.0 * p * c);
        let x = machine_balance(&a, CC, FP64).unwrap();
        let y = machine_balance(&b, CC, FP64).unwrap();
        prop_assert!((x - y).abs() <= 1e-12 * x);
    }

    #[test]
    fn csr_is_generic_with_csr_metadata(s in stats(), p in precision(), idx in prop_oneof![Just(2u8), Just(4), Just(8)]) {
        let meta = SparseMetadataTraffic::new(s.nnz() + s.rows() + 1, idx, 0, 0).unwrap();
        let a = spmv_csr_model(&s, idx, p).unwrap();
        let b = spmv_generic_model(&s, &meta, p).unwrap();
        prop_assert_eq!(a.work_flops(), b.work_flops());
        prop_assert_eq!(a.traffic_bytes(), b.traffic_bytes());
        prop_assert_eq!(a.intensity(), b.intensity());
    }

    #[test]
    fn spmv_below_gemv(s in stats(), p in precision(),
                       ic in 1u64..1_000_000, ib in prop_oneof![Just(1u8), Just(2), Just(4), Just(8)]) {
        prop_assume!(u128::from(s.nnz()) < u128::from(s.rows()) * u128::from(s.cols()));
        let meta = SparseMetadataTraffic::new(ic, ib, 0, 0).unwrap();
        let sp = spmv_generic_model(&s, &meta, p).unwrap().intensity();
        let ge = gemv_model(s.rows(), s.cols(), p).unwrap().intensity();
        prop_assert!(sp < ge);
    }

    #[test]
    fn intensity_monotone(w in 0u128..1_000_000, q in 1u128..1_000_000, dw in 1u128..1000, dq in 1u128..1000) {
        prop_assert!(Intensity::new(w + dw, q) > Intensity::new(w, q));
        if w > 0 {
            prop_assert!(Intensity::new(w, q + dq) < Intensity::new(w, q));
        }
    }

    #[test]
    fn stencil_linear_in_depth(points in 1u32..200, t in 1u64..1000, p in precision()) {
        let shape = StencilShape::new("custom", 3, points).unwrap();
        let one = stencil_model(&shape, p, 1).unwrap().intensity().as_ratio();
        let many = stencil_model(&shape, p, t).unwrap().intensity().as_ratio();
        prop_assert_eq!(many, one * u128::from(t));
    }

    #[test]
    fn roofline_arms(bw in 1e11f64..1e13, cc in 1e12f64..1e14, a in 1.0f64..8.0, frac in 0.0f64..1.0, above in 1.0f64..100.0) {
        let s = spec(bw, cc, cc * a);
        for u in [CC, TC] {
            let peak = s.peak(u, FP64).unwrap();
            let ridge = ridge_point(&s, u, FP64).unwrap();
            let below = ridge * frac;
            if below < ridge {
                prop_assert_eq!(attainable(&s, u, FP64, below).unwrap(), bw * below);
            }
            prop_assert_eq!(attainable(&s, u, FP64, ridge).unwrap(), peak);
            prop_assert_eq!(attainable(&s, u, FP64, ridge * above).unwrap(), peak);
        }
        // Same bandwidth arm, higher flat arm.
        let x = ridge_point(&s, CC, FP64).unwrap() * (frac * 4.0);
        prop_assert!(attainable(&s, TC, FP64, x).unwrap() >= attainable(&s, CC, FP64, x).unwrap());
        let memory = classify(x, machine_balance(&s, CC, FP64).unwrap()) == Boundedness::MemoryBound;
        prop_assert_eq!(memory, attainable(&s, CC, FP64, x).unwrap() < cc);
    }

    #[test]
    fn attainable_non_decreasing(xs in proptest::collection::vec(0.0f64..50.0, 2..40)) {
        let s = spec(1.94e12, 9.7e12, 19.5e12);
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let ys: Vec<f64> = xs.iter().map(|&x| attainable(&s, CC, FP64, x).unwrap()).collect();
        prop_assert!(ys.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn unoverlapped_bounded(c in 1e-6f64..10.0, extra in 0.0f64..10.0, o in 0.0f64..10.0, a1 in 1.0f64..50.0, da in 0.0f64..50.0) {
        let tb = TimeBreakdown::new(c, c + extra, o).unwrap();
        let s1 = unoverlapped_speedup(&tb, a1).unwrap();
        let s2 = unoverlapped_speedup(&tb, a1 + da).unwrap();
        prop_assert!(s1 >= 1.0 && s1 <= a1 * (1.0 + 1e-15));
        prop_assert!(s2 >= s1);
        prop_assert!(s1 <= tensor_core_ceiling(a1).unwrap().value * (1.0 + 1e-15));
    }

    #[test]
    fn kernel_ceiling_chain(alpha in 1.0001f64..100.0, b in 0.01f64..100.0, frac in 1e-6f64..0.999_999) {
        let i = b * frac;
        let k = kernel_speedup_ceiling(alpha, b, i).unwrap().value;
        prop_assert!(k < tensor_core_ceiling(alpha).unwrap().value);
        let k_inf = kernel_speedup_ceiling(1e12, b, i).unwrap().value;
        let w = workload_ceiling(i, b).unwrap().value;
        prop_assert!(k_inf <= w + 1e-6);
        prop_assert!((k_inf - w).abs() < 1e-6);
        prop_assert!(w <= 2.0);
    }

    #[test]
    fn unoverlapped_strictly_below_kernel_ceiling(alpha in 1.001f64..100.0, b in 0.01f64..100.0, frac in 1e-4f64..0.9999, c in 1e-3f64..10.0, o in 1e-3f64..10.0) {
        let i = b * frac;
        let tb = TimeBreakdown::new(c, c * b / i, o).unwrap();
        let s = unoverlapped_speedup(&tb, alpha).unwrap();
        prop_assert!(s < kernel_speedup_ceiling(alpha, b, i).unwrap().value);
        let tight = TimeBreakdown::new(c, c * b / i, 0.0).unwrap();
        let eq = unoverlapped_speedup(&tight, alpha).unwrap();
        prop_assert!((eq - kernel_speedup_ceiling(alpha, b, i).unwrap().value).abs() <= 1e-12);
    }

    #[test]
    fn overlap_hides_compute(c in 0.0f64..10.0, extra in 1e-9f64..10.0, o in 0.0f64..30.0, alpha in 1.0f64..1e6) {
        let tb = TimeBreakdown::new(c, c + extra, o).unwrap();
        prop_assert_eq!(overlapped_total(&tb), overlapped_total(&tb.accelerated(alpha).unwrap()));
    }

    #[test]
    fn temporal_depth_minimal(b in 0.0f64..1e4, i in 1e-3f64..1e3) {
        let t = min_temporal_depth(b, i).unwrap();
        prop_assert!(t >= 1);
        prop_assert!((t as f64) * i > b);
        prop_assert!(((t - 1) as f64) * i <= b);
    }

    #[test]
    fn symmetric_expansion_matches_dense(n in 1u64..12, cells in proptest::collection::btree_set((0u64..12, 0u64..12), 1..40)) {
        let lower: BTreeSet<(u64, u64)> = cells
            .into_iter()
            .filter(|&(r, c)| r < n && c < n)
            .map(|(r, c)| if r >= c { (r, c) } else { (c, r) })
            .collect();
        prop_assume!(!lower.is_empty());
        let mut text = format!("%%MatrixMarket matrix coordinate real symmetric\n{n} {n} {}\n", lower.len());
        for (r, c) in &lower {
            text.push_str(&format!("{} {} 1.5\n", r + 1, c + 1));
        }
        // Brute force: mirror into a dense grid and count occupied cells.
        let mut dense = vec![false; (n * n) as usize];
        for &(r, c) in &lower {
            dense[(r * n + c) as usize] = true;
            dense[(c * n + r) as usize] = true;
        }
        let full = dense.iter().filter(|&&x| x).count() as u64;
        let diag = lower.iter().filter(|(r, c)| r == c).count() as u64;
        let parsed = parse_stats_str(&text).unwrap();
        prop_assert_eq!(parsed.nnz(), full);
        prop_assert_eq!(parsed.nnz(), 2 * lower.len() as u64 - diag);
    }

    #[test]
    fn general_coordinate_round_trip(m in 1u64..50, n in 1u64..50, seed in proptest::collection::vec((0u64..50, 0u64..50), 1..60)) {
        let cells: BTreeSet<(u64, u64)> = seed.into_iter().map(|(r, c)| (r % m, c % n)).collect();
        let mut text = format!("%%MatrixMarket matrix coordinate real general\n% generated\n{m} {n} {}\n", cells.len());
        for (r, c) in &cells {
            text.push_str(&format!("{} {} -0.25\n", r + 1, c + 1));
        }
        let s = parse_stats_str(&text).unwrap();
        prop_assert_eq!((s.rows(), s.cols(), s.nnz()), (m, n, cells.len() as u64));
    }
}
