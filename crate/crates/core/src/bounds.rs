//! Overlap models and closed-form ceilings on tensor-core speedup.
//!
//! Two execution extremes are modeled. When memory access and computation
//! fully overlap, total time is the largest component and a memory-bound
//! kernel gains nothing from faster compute. When they serialize, the
//! compute share shrinks by α and the gain is capped by the ceilings below.
//! Every ceiling is an open bound: `value` is the supremum.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Rounded FP64 tensor-to-CUDA-core ratio of recent data-center GPUs.
pub const NOMINAL_FP64_ALPHA: f64 = 2.0;

/// Depths beyond this are reported as an error rather than computed.
const MAX_TEMPORAL_DEPTH: f64 = 1e15;

/// Compute, memory and remaining time of one kernel run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeBreakdown {
    t_cmp: f64,
    t_mem: f64,
    t_others: f64,
}

impl TimeBreakdown {
    pub fn new(t_cmp: f64, t_mem: f64, t_others: f64) -> Result<Self> {
        for t in [t_cmp, t_mem, t_others] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidBreakdown(
                    "times must be finite and non-negative",
                ));
            }
        }
        if t_cmp == 0.0 && t_mem == 0.0 && t_others == 0.0 {
            return Err(Error::InvalidBreakdown(
                "at least one time must be positive",
            ));
        }
        Ok(Self {
            t_cmp,
            t_mem,
            t_others,
        })
    }

    pub fn t_cmp(&self) -> f64 {
        self.t_cmp
    }

    pub fn t_mem(&self) -> f64 {
        self.t_mem
    }

    pub fn t_others(&self) -> f64 {
        self.t_others
    }

    /// Same breakdown with computation accelerated by `alpha`.
    pub fn accelerated(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            t_cmp: self.t_cmp / alpha,
            ..*self
        })
    }

    pub fn is_memory_bound(&self) -> bool {
        self.t_mem > self.t_cmp
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Un-overlapped speedup of a concrete time breakdown.
    ExactUnoverlapped,
    /// Per-kernel ceiling from α, balance and intensity.
    KernelCeiling,
    /// Machine-wide ceiling from α alone.
    TensorCoreCeiling,
    /// Ceiling from intensity and balance with unbounded α.
    WorkloadCeiling,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExactUnoverlapped => f.write_str("ExactUnoverlapped"),
            Self::KernelCeiling => f.write_str("KernelCeiling"),
            Self::TensorCoreCeiling => f.write_str("TensorCoreCeiling"),
            Self::WorkloadCeiling => f.write_str("WorkloadCeiling"),
        }
    }
}

/// A named speedup ceiling.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupBound {
    pub value: f64,
    pub kind: BoundKind,
    pub assumptions: Vec<String>,
    /// Set when the inputs fall outside the memory-bound premise the bound
    /// was derived under; the value is still computed.
    pub premise_violated: bool,
}

impl SpeedupBound {
    fn new(value: f64, kind: BoundKind, assumptions: &[&str]) -> Self {
        Self {
            value,
            kind,
            assumptions: assumptions.iter().map(|s| s.to_string()).collect(),
            premise_violated: false,
        }
    }

    fn with_premise(mut self, holds: bool) -> Self {
        self.premise_violated = !holds;
        self
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn check_intensity(intensity: f64) -> Result<()> {
    if intensity.is_finite() && intensity > 0.0 {
        Ok(())
    } else {
        Err(Error::ZeroIntensity)
    }
}

fn check_balance(balance: f64) -> Result<()> {
    if balance.is_finite() && balance >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBalance)
    }
}

/// `T_mem / T_cmp = B / I`; above 1 means memory-bound.
pub fn mem_cmp_ratio(balance: f64, intensity: f64) -> Result<f64> {
    check_intensity(intensity)?;
    check_balance(balance)?;
    Ok(balance / intensity)
}

/// Fully overlapped run time: the largest component.
pub fn overlapped_total(tb: &TimeBreakdown) -> f64 {
    tb.t_cmp.max(tb.t_mem).max(tb.t_others)
}

/// Fully overlapped speedup when computation is accelerated by `alpha`.
pub fn overlapped_speedup(tb: &TimeBreakdown, alpha: f64) -> Result<f64> {
    Ok(overlapped_total(tb) / overlapped_total(&tb.accelerated(alpha)?))
}

/// Fully un-overlapped run time: the sum of components.
pub fn unoverlapped_total(tb: &TimeBreakdown) -> f64 {
    tb.t_cmp + tb.t_mem + tb.t_others
}

/// `(T_cmp + T_mem + T_others) / (T_cmp/α + T_mem + T_others)`, in `[1, α]`.
pub fn unoverlapped_speedup(tb: &TimeBreakdown, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let rest = tb.t_mem + tb.t_others;
    Ok((tb.t_cmp + rest) / (tb.t_cmp / alpha + rest))
}

/// [`unoverlapped_speedup`] wrapped as a bound record.
pub fn unoverlapped_bound(tb: &TimeBreakdown, alpha: f64) -> Result<SpeedupBound> {
    Ok(SpeedupBound::new(
        unoverlapped_speedup(tb, alpha)?,
        BoundKind::ExactUnoverlapped,
        &["fully un-overlapped execution", "given time breakdown"],
    )
    .with_premise(tb.t_mem >= tb.t_cmp))
}

/// `1 + (α − 1) / (1 + α·B/I)`.
///
/// Holds for memory-bound kernels run fully un-overlapped with
/// `T_mem = T_cmp·B/I`; `premise_violated` is set when `I >= B`.
pub fn kernel_speedup_ceiling(alpha: f64, balance: f64, intensity: f64) -> Result<SpeedupBound> {
    check_alpha(alpha)?;
    check_intensity(intensity)?;
    check_balance(balance)?;
    let value = 1.0 + (alpha - 1.0) / (1.0 + alpha * (balance / intensity));
    Ok(SpeedupBound::new(
        value,
        BoundKind::KernelCeiling,
        &[
            "fully un-overlapped execution",
            "T_others >= 0",
            "T_mem = T_cmp * B / I",
            "open bound: speedup < value",
        ],
    )
    .with_premise(intensity < balance))
}

/// `1 + (α − 1)/(1 + α) = 2 − 2/(1 + α)`, strictly below 2.
pub fn tensor_core_ceiling(alpha: f64) -> Result<SpeedupBound> {
    check_alpha(alpha)?;
    // Once α passes 2^53 the quotient rounds to 1; keep the bound open.
    let value = (1.0 + (alpha - 1.0) / (1.0 + alpha)).min(2.0f64.next_down());
    Ok(SpeedupBound::new(
        value,
        BoundKind::TensorCoreCeiling,
        &[
            "fully un-overlapped execution",
            "memory-bound limit T_cmp -> T_mem",
            "open bound: speedup < value",
        ],
    ))
}

/// `1 + I/B`, the kernel ceiling as α grows without bound.
pub fn workload_ceiling(intensity: f64, balance: f64) -> Result<SpeedupBound> {
    if !(balance.is_finite() && balance > 0.0) {
        return Err(Error::ZeroBalance);
    }
    check_intensity(intensity)?;
    Ok(SpeedupBound::new(
        1.0 + intensity / balance,
        BoundKind::WorkloadCeiling,
        &[
            "alpha -> infinity",
            "fully un-overlapped execution",
            "open bound: speedup < value",
        ],
    )
    .with_premise(intensity <= balance))
}

/// Smallest `t` with `t·I₁ > B`: how many fused stencil steps it takes to
/// leave the memory-bound region.
pub fn min_temporal_depth(balance: f64, single_step_intensity: f64) -> Result<u64> {
    check_intensity(single_step_intensity)?;
    check_balance(balance)?;
    let ratio = balance / single_step_intensity;
    if ratio >= MAX_TEMPORAL_DEPTH {
        return Err(Error::InvalidRange("required temporal depth is too large"));
    }
    let mut t = libm::floor(ratio) as u64 + 1;
    // The quotient may round across an integer; settle on the products.
    while t > 1 && ((t - 1) as f64) * single_step_intensity > balance {
        t -= 1;
    }
    while (t as f64) * single_step_intensity <= balance {
        t += 1;
    }
    Ok(t)
}

/// Effective throughput of SCALE mapped onto an `m x n` tensor-core MMA,
/// which uses only `1/max(m, n)` of the unit.
pub fn tc_scale_trick_throughput(peak_tc: f64, m: u32, n: u32) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidCount(
            "tensor-core tile dimensions must be at least 1",
        ));
    }
    if !(peak_tc.is_finite() && peak_tc > 0.0) {
        return Err(Error::InvalidSpec(
            "tensor-core peak must be positive".to_string(),
        ));
    }
    Ok(peak_tc / f64::from(m.max(n)))
}

/// Kernel, tensor-core and workload ceilings for one (α, B, I) triple, plus
/// the tensor-core ceiling at the nominal α = 2 when α differs from it.
pub fn ceilings(alpha: f64, balance: f64, intensity: f64) -> Result<Vec<SpeedupBound>> {
    let mut out = vec![
        kernel_speedup_ceiling(alpha, balance, intensity)?,
        tensor_core_ceiling(alpha)?.with_premise(intensity < balance),
    ];
    if alpha != NOMINAL_FP64_ALPHA {
        let mut nominal =
            tensor_core_ceiling(NOMINAL_FP64_ALPHA)?.with_premise(intensity < balance);
        nominal.assumptions.push("nominal alpha = 2".to_string());
        out.push(nominal);
    }
    out.push(workload_ceiling(intensity, balance)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tb(c: f64, m: f64, o: f64) -> TimeBreakdown {
        TimeBreakdown::new(c, m, o).unwrap()
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(mem_cmp_ratio(5.0, 1.0 / 16.0).unwrap(), 80.0);
        assert_eq!(mem_cmp_ratio(5.0, 0.25).unwrap(), 20.0);
        assert_eq!(mem_cmp_ratio(0.625, 0.625).unwrap(), 1.0);
        assert_eq!(mem_cmp_ratio(5.0, 0.0), Err(Error::ZeroIntensity));
    }

    #[test]
    fn breakdown_validation() {
        assert!(TimeBreakdown::new(0.0, 0.0, 0.0).is_err());
        assert!(TimeBreakdown::new(-1.0, 1.0, 0.0).is_err());
        assert!(TimeBreakdown::new(f64::NAN, 1.0, 0.0).is_err());
        assert!(TimeBreakdown::new(0.0, 0.0, 7.0).is_ok());
    }

    #[test]
    fn overlapped_examples() {
        let t = tb(3.0, 5.0, 2.0);
        assert_eq!(overlapped_total(&t), 5.0);
        assert_eq!(overlapped_total(&t.accelerated(2.0).unwrap()), 5.0);
        assert_eq!(overlapped_speedup(&t, 2.0).unwrap(), 1.0);
        assert_eq!(overlapped_total(&tb(0.0, 0.0, 7.0)), 7.0);
    }

    #[test]
    fn unoverlapped_examples() {
        assert_eq!(
            unoverlapped_speedup(&tb(1.0, 1.0, 0.0), 2.0).unwrap(),
            4.0 / 3.0
        );
        assert_eq!(unoverlapped_speedup(&tb(3.0, 5.0, 2.0), 1.0).unwrap(), 1.0);
        let s = unoverlapped_speedup(&tb(1.0, 4.0, 1.0), 2.0).unwrap();
        assert!((s - 6.0 / 5.5).abs() < 1e-15);
        assert_eq!(unoverlapped_speedup(&tb(0.0, 3.0, 1.0), 4.0).unwrap(), 1.0);
        assert_eq!(
            unoverlapped_speedup(&tb(1.0, 1.0, 0.0), 0.5),
            Err(Error::InvalidAlpha(0.5))
        );
        let b = unoverlapped_bound(&tb(1.0, 4.0, 1.0), 2.0).unwrap();
        assert_eq!(b.kind, BoundKind::ExactUnoverlapped);
        assert!(!b.premise_violated);
    }

    #[test]
    fn kernel_ceiling_examples() {
        let b = kernel_speedup_ceiling(2.0, 5.0, 0.25).unwrap();
        assert_eq!(b.kind, BoundKind::KernelCeiling);
        assert!((b.value - (1.0 + 1.0 / 41.0)).abs() < 1e-15);
        assert!(!b.premise_violated);
        assert_eq!(kernel_speedup_ceiling(1.0, 5.0, 0.25).unwrap().value, 1.0);
        let near = kernel_speedup_ceiling(2.0, 5.0, 5.0 - 1e-12).unwrap();
        assert!((near.value - 4.0 / 3.0).abs() < 1e-12);
        assert!(
            kernel_speedup_ceiling(2.0, 5.0, 6.0)
                .unwrap()
                .premise_violated
        );
        assert_eq!(
            kernel_speedup_ceiling(2.0, 5.0, 0.0),
            Err(Error::ZeroIntensity)
        );
        assert!(kernel_speedup_ceiling(0.9, 5.0, 1.0).is_err());
    }

    #[test]
    fn tensor_core_ceiling_examples() {
        assert_eq!(tensor_core_ceiling(2.0).unwrap().value, 4.0 / 3.0);
        assert_eq!(tensor_core_ceiling(1.0).unwrap().value, 1.0);
        let v = tensor_core_ceiling(1e9).unwrap().value;
        assert!(v > 1.999_999 && v < 2.0);
        assert!(tensor_core_ceiling(1e300).unwrap().value < 2.0);
        assert!(tensor_core_ceiling(f64::INFINITY).is_err());
        assert!(tensor_core_ceiling(0.0).is_err());
    }

    #[test]
    fn workload_ceiling_examples() {
        let b = workload_ceiling(0.25, 5.0).unwrap();
        assert!((b.value - 1.05).abs() < 1e-15);
        assert_eq!(workload_ceiling(5.0, 5.0).unwrap().value, 2.0);
        assert_eq!(workload_ceiling(1.0 / 16.0, 5.0).unwrap().value, 1.0125);
        assert_eq!(workload_ceiling(1.0, 0.0), Err(Error::ZeroBalance));
        assert!(workload_ceiling(6.0, 5.0).unwrap().premise_violated);
    }

    #[test]
    fn temporal_depth_examples() {
        assert_eq!(min_temporal_depth(9.99, 0.625).unwrap(), 16);
        assert_eq!(min_temporal_depth(0.5, 0.625).unwrap(), 1);
        assert_eq!(min_temporal_depth(8.5, 0.625).unwrap(), 14);
        // Exact equality is Balanced, so one more step is needed.
        assert_eq!(min_temporal_depth(10.0, 0.625).unwrap(), 17);
        assert_eq!(min_temporal_depth(0.0, 0.625).unwrap(), 1);
        assert_eq!(min_temporal_depth(1.0, 0.0), Err(Error::ZeroIntensity));
        assert!(min_temporal_depth(1e300, 1e-10).is_err());
    }

    #[test]
    fn scale_trick_examples() {
        assert_eq!(tc_scale_trick_throughput(19.5e12, 8, 4).unwrap(), 2.4375e12);
        assert_eq!(tc_scale_trick_throughput(67.0e12, 8, 4).unwrap(), 8.375e12);
        assert_eq!(tc_scale_trick_throughput(3.0e12, 1, 1).unwrap(), 3.0e12);
        assert!(tc_scale_trick_throughput(3.0e12, 0, 4).is_err());
        assert!(tc_scale_trick_throughput(0.0, 8, 4).is_err());
    }

    #[test]
    fn ceiling_set() {
        let all = ceilings(19.5 / 9.7, 5.0, 0.25).unwrap();
        let kinds: Vec<_> = all.iter().map(|b| b.kind).collect();
        assert_eq!(
            kinds,
            [
                BoundKind::KernelCeiling,
                BoundKind::TensorCoreCeiling,
                BoundKind::TensorCoreCeiling,
                BoundKind::WorkloadCeiling
            ]
        );
        assert_eq!(ceilings(2.0, 5.0, 0.25).unwrap().len(), 3);
    }
}
