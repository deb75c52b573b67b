//! Split-FFT block-Toeplitz matvec with lazy embedding and eager projection.
//!
//! Each level of the circulant embedding is replaced by a pair of branches: the
//! vector itself (even Fourier coefficients of the zero-padded level) and a
//! phase-shifted copy (odd coefficients). A node at depth `l > 0` transforms level
//! `l - 1` on entry and inverts it before returning, so the doubled level never
//! exists in memory. Leaves multiply by the parity block `T[bId]` of their path.
//!
//! Children are merged in the spatial domain as `½(v_even + P̄ v_odd)`, which is
//! the leading half of the inverse transform of the interleaved spectrum.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{default_provider, FftProvider};
use crate::kernel::{BranchId, KernelSpectra};
use crate::meter::AllocationMeter;
use crate::tensor::{phase_factors, phase_shift_axis, ComplexTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionMode {
    /// Depth-first, one live child per tree level: peak `(d+1)·s` working elements.
    LazySequential,
    /// Sibling branches run as parallel tasks down to a depth set by the task budget.
    EagerParallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionPolicy {
    pub mode: ExecutionMode,
    pub tasks: usize,
}

impl Default for ExecutionPolicy {
    fn default() -> Self {
        Self::lazy()
    }
}

impl ExecutionPolicy {
    pub fn lazy() -> Self {
        Self {
            mode: ExecutionMode::LazySequential,
            tasks: 1,
        }
    }

    pub fn parallel(tasks: usize) -> Result<Self> {
        if tasks == 0 {
            return Err(Error::InvalidArgument("task budget must be >= 1".into()));
        }
        Ok(Self {
            mode: ExecutionMode::EagerParallel,
            tasks,
        })
    }

    /// Number of tree levels whose children are forked as tasks.
    fn fork_depth(&self) -> usize {
        match self.mode {
            ExecutionMode::LazySequential => 0,
            ExecutionMode::EagerParallel => self.tasks.next_power_of_two().trailing_zeros() as usize,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.mode {
            ExecutionMode::LazySequential => "lazy",
            ExecutionMode::EagerParallel => "parallel",
        }
    }
}

/// Operation counts and storage high-water mark of one matvec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub levels: Vec<usize>,
    /// Single-axis forward transforms applied to whole tensors.
    pub fft_fwd: u64,
    pub fft_inv: u64,
    /// Elementwise products with kernel data.
    pub kernel_mults: u64,
    /// Elementwise products with phase factors (splits and merges).
    pub phase_mults: u64,
    /// Peak live working-vector elements; kernel storage excluded.
    pub peak_elems: u64,
    /// Complex elements of kernel data held by the operator.
    pub kernel_elems: u64,
}

impl RunMetrics {
    pub fn size(&self) -> u64 {
        self.levels.iter().product::<usize>() as u64
    }

    /// All elementwise complex multiplies.
    pub fn mults(&self) -> u64 {
        self.kernel_mults + self.phase_mults
    }

    /// Working peak plus kernel storage.
    pub fn total_peak(&self) -> u64 {
        self.peak_elems + self.kernel_elems
    }
}

#[derive(Debug, Default)]
pub(crate) struct Counters {
    pub fft_fwd: AtomicU64,
    pub fft_inv: AtomicU64,
    pub kernel_mults: AtomicU64,
    pub phase_mults: AtomicU64,
}

impl Counters {
    pub(crate) fn add(counter: &AtomicU64, n: usize) {
        counter.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub(crate) fn snapshot(&self, levels: &[usize], peak: usize, kernel: usize) -> RunMetrics {
        RunMetrics {
            levels: levels.to_vec(),
            fft_fwd: self.fft_fwd.load(Ordering::SeqCst),
            fft_inv: self.fft_inv.load(Ordering::SeqCst),
            kernel_mults: self.kernel_mults.load(Ordering::SeqCst),
            phase_mults: self.phase_mults.load(Ordering::SeqCst),
            peak_elems: peak as u64,
            kernel_elems: kernel as u64,
        }
    }
}

/// Phase-shifted copy of `v` along `level`: the odd-coefficient child.
pub fn spt_brn(v: &ComplexTensor, level: usize) -> Result<ComplexTensor> {
    let mut child = v.try_clone()?;
    phase_shift_axis(&mut child, level, false)?;
    Ok(child)
}

/// `½(v_even + P̄ v_odd)` along `level`.
pub fn mrg_brn(v_even: &ComplexTensor, v_odd: &ComplexTensor, level: usize) -> Result<ComplexTensor> {
    let mut out = v_even.try_clone()?;
    merge_into(&mut out, v_odd, level)?;
    Ok(out)
}

/// `v ∘ T[b]`.
pub fn mul_brn(v: &ComplexTensor, k: &KernelSpectra, b: BranchId) -> Result<ComplexTensor> {
    let mut out = v.try_clone()?;
    k.multiply_into(&mut out, b)?;
    Ok(out)
}

fn merge_into(even: &mut ComplexTensor, odd: &ComplexTensor, axis: usize) -> Result<()> {
    even.check_same_shape(odd)?;
    even.check_axis(axis)?;
    let (outer, n, inner) = even.axis_layout(axis);
    let phases = phase_factors(n, true);
    let dst = even.data_mut();
    let src = odd.data();
    for o in 0..outer {
        for (j, p) in phases.iter().enumerate() {
            let at = (o * n + j) * inner;
            for q in at..at + inner {
                dst[q] = 0.5 * (dst[q] + p * src[q]);
            }
        }
    }
    Ok(())
}

struct Run<'a> {
    kernel: &'a KernelSpectra,
    provider: &'a dyn FftProvider,
    meter: &'a AllocationMeter,
    counters: &'a Counters,
    fork_depth: usize,
}

impl Run<'_> {
    fn branch(&self, depth: usize, id: BranchId, v: &mut ComplexTensor) -> Result<()> {
        let d = self.kernel.ndim();
        let s = v.len();
        if depth > 0 {
            self.provider.forward(v, depth - 1)?;
            Counters::add(&self.counters.fft_fwd, 1);
        }
        if depth < d {
            let axis = depth;
            let _lease = self.meter.track(s)?;
            let mut child = spt_brn(v, axis)?;
            Counters::add(&self.counters.phase_mults, s);
            let odd_id = id.next(axis)?;
            if depth < self.fork_depth {
                let (even, odd) = rayon::join(
                    || self.branch(depth + 1, id, v),
                    || self.branch(depth + 1, odd_id, &mut child),
                );
                even?;
                odd?;
            } else {
                self.branch(depth + 1, id, v)?;
                self.branch(depth + 1, odd_id, &mut child)?;
            }
            merge_into(v, &child, axis)?;
            Counters::add(&self.counters.phase_mults, s);
        } else {
            self.kernel.multiply_into(v, id)?;
            Counters::add(&self.counters.kernel_mults, s);
        }
        if depth > 0 {
            self.provider.inverse(v, depth - 1)?;
            Counters::add(&self.counters.fft_inv, 1);
        }
        Ok(())
    }
}

/// Reusable split-FFT operator over one precomputed kernel.
pub struct SplitOperator {
    kernel: Arc<KernelSpectra>,
    provider: Arc<dyn FftProvider>,
    policy: ExecutionPolicy,
    pool: Option<rayon::ThreadPool>,
    mem_limit: Option<usize>,
    last: Mutex<Option<RunMetrics>>,
}

impl std::fmt::Debug for SplitOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitOperator")
            .field("levels", &self.kernel.levels())
            .field("policy", &self.policy)
            .finish_non_exhaustive()
    }
}

impl SplitOperator {
    pub fn new(kernel: Arc<KernelSpectra>, policy: ExecutionPolicy) -> Result<Self> {
        Self::with_provider(kernel, policy, default_provider())
    }

    pub fn with_provider(
        kernel: Arc<KernelSpectra>,
        policy: ExecutionPolicy,
        provider: Arc<dyn FftProvider>,
    ) -> Result<Self> {
        if policy.tasks == 0 {
            return Err(Error::InvalidArgument("task budget must be >= 1".into()));
        }
        let pool = match policy.mode {
            ExecutionMode::LazySequential => None,
            ExecutionMode::EagerParallel => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(policy.tasks)
                    .build()
                    .map_err(|e| Error::Resource(format!("thread pool: {e}")))?,
            ),
        };
        Ok(Self {
            kernel,
            provider,
            policy,
            pool,
            mem_limit: None,
            last: Mutex::new(None),
        })
    }

    /// Fails runs whose working set would exceed `elems` complex elements.
    pub fn with_mem_limit(mut self, elems: usize) -> Self {
        self.mem_limit = Some(elems);
        self
    }

    pub fn kernel(&self) -> &KernelSpectra {
        &self.kernel
    }

    pub fn policy(&self) -> ExecutionPolicy {
        self.policy
    }

    /// `y = T v` together with the run's counters.
    pub fn apply(&self, v: &ComplexTensor) -> Result<(ComplexTensor, RunMetrics)> {
        if v.shape() != self.kernel.levels() {
            return Err(Error::ShapeMismatch {
                expected: self.kernel.levels().to_vec(),
                found: v.shape().to_vec(),
            });
        }
        let meter = match self.mem_limit {
            Some(limit) => AllocationMeter::with_limit(limit),
            None => AllocationMeter::new(),
        };
        let counters = Counters::default();
        let run = Run {
            kernel: &self.kernel,
            provider: &*self.provider,
            meter: &meter,
            counters: &counters,
            fork_depth: self.policy.fork_depth(),
        };
        let y = {
            let _root = meter.track(v.len())?;
            let mut work = v.try_clone()?;
            match &self.pool {
                Some(pool) => pool.install(|| run.branch(0, BranchId::ROOT, &mut work))?,
                None => run.branch(0, BranchId::ROOT, &mut work)?,
            }
            work
        };
        let metrics = counters.snapshot(self.kernel.levels(), meter.peak(), self.kernel.stored_elems());
        *self.last.lock().expect("metrics lock poisoned") = Some(metrics.clone());
        Ok((y, metrics))
    }

    /// Counters of the most recent [`apply`](Self::apply).
    pub fn last_metrics(&self) -> Option<RunMetrics> {
        self.last.lock().expect("metrics lock poisoned").clone()
    }
}

pub fn toe_mul_split(
    k: &KernelSpectra,
    v: &ComplexTensor,
    policy: ExecutionPolicy,
) -> Result<(ComplexTensor, RunMetrics)> {
    SplitOperator::new(Arc::new(k.clone()), policy)?.apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::fft_axis;
    use num_complex::Complex64;
    use crate::kernel::{embed_generator, precompute_spectra, GeneratorSpec, PrecomputeStrategy, Symmetry};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kernel_2x2() -> KernelSpectra {
        let g = GeneratorSpec::new(vec![2], vec![c(2., 0.), c(1., 0.), c(3., 0.)], Symmetry::General).unwrap();
        let e = embed_generator(&g, c(0., 0.)).unwrap();
        precompute_spectra(&e, PrecomputeStrategy::FullFft, &*default_provider()).unwrap()
    }

    #[test]
    fn two_by_two_worked_case() {
        let v = ComplexTensor::new(vec![2], vec![c(1., 0.), c(1., 0.)]).unwrap();
        let (y, m) = toe_mul_split(&kernel_2x2(), &v, ExecutionPolicy::lazy()).unwrap();
        assert!((y.data()[0] - c(3., 0.)).norm() < 1e-12);
        assert!((y.data()[1] - c(4., 0.)).norm() < 1e-12);
        assert_eq!((m.fft_fwd, m.fft_inv), (2, 2));
        assert_eq!(m.kernel_mults, 4);
        assert_eq!(m.phase_mults, 4);
        assert_eq!(m.peak_elems, 4);
    }

    #[test]
    fn hand_assembled_branches() {
        // spt -> FFT -> mul -> iFFT on both branches, then merge
        let k = kernel_2x2();
        let v = ComplexTensor::new(vec![2], vec![c(1., 0.), c(1., 0.)]).unwrap();
        let mut even = v.clone();
        let mut odd = spt_brn(&v, 0).unwrap();
        assert!((odd.data()[1] - c(0., -1.)).norm() < 1e-15);
        fft_axis(&mut even, 0).unwrap();
        fft_axis(&mut odd, 0).unwrap();
        let mut even = mul_brn(&even, &k, BranchId::ROOT).unwrap();
        let mut odd = mul_brn(&odd, &k, BranchId::new(1, 1).unwrap()).unwrap();
        crate::fft::ifft_axis(&mut even, 0).unwrap();
        crate::fft::ifft_axis(&mut odd, 0).unwrap();
        let y = mrg_brn(&even, &odd, 0).unwrap();
        assert!((y.data()[0] - c(3., 0.)).norm() < 1e-12);
        assert!((y.data()[1] - c(4., 0.)).norm() < 1e-12);
    }

    #[test]
    fn merge_edge_cases() {
        let e = ComplexTensor::new(vec![3], vec![c(2., 0.), c(4., 2.), c(-6., 0.)]).unwrap();
        let zero = ComplexTensor::zeros(&[3]).unwrap();
        let half = mrg_brn(&e, &zero, 0).unwrap();
        assert_eq!(half.data(), &[c(1., 0.), c(2., 1.), c(-3., 0.)]);

        let delta = ComplexTensor::new(vec![3], vec![c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        let m = mrg_brn(&delta, &delta, 0).unwrap();
        assert!((m.data()[0] - c(1., 0.)).norm() < 1e-15);

        let other = ComplexTensor::zeros(&[4]).unwrap();
        assert!(matches!(mrg_brn(&e, &other, 0), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn split_then_merge_with_identity_leaves_is_identity() {
        for n in 2..=8 {
            let v = ComplexTensor::from_fn(&[n], |i| c((i[0] as f64).sin(), (i[0] as f64 * 0.3).cos()))
                .unwrap();
            let odd = spt_brn(&v, 0).unwrap();
            let back = mrg_brn(&v, &odd, 0).unwrap();
            let err = crate::tensor::relative_error(&back, &v).unwrap();
            assert!(err < 1e-14, "n = {n}: {err}");
        }
    }

    #[test]
    fn spt_brn_leaves_input_and_delta_untouched() {
        let delta = ComplexTensor::new(vec![4], vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        let out = spt_brn(&delta, 0).unwrap();
        assert_eq!(out, delta);
        let v = ComplexTensor::new(vec![2], vec![c(5., 0.), c(7., 0.)]).unwrap();
        let out = spt_brn(&v, 0).unwrap();
        assert_eq!(v.data(), &[c(5., 0.), c(7., 0.)]);
        assert!((out.data()[1] - c(0., -7.)).norm() < 1e-14);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let v = ComplexTensor::zeros(&[3]).unwrap();
        assert!(matches!(
            toe_mul_split(&kernel_2x2(), &v, ExecutionPolicy::lazy()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn policy_validation() {
        assert!(ExecutionPolicy::parallel(0).is_err());
        assert_eq!(ExecutionPolicy::parallel(1).unwrap().fork_depth(), 0);
        assert_eq!(ExecutionPolicy::parallel(4).unwrap().fork_depth(), 2);
        assert_eq!(ExecutionPolicy::parallel(5).unwrap().fork_depth(), 3);
        assert_eq!(ExecutionPolicy::lazy().fork_depth(), 0);
    }

    #[test]
    fn mem_limit_surfaces_resource_error() {
        let op = SplitOperator::new(Arc::new(kernel_2x2()), ExecutionPolicy::lazy())
            .unwrap()
            .with_mem_limit(3);
        let v = ComplexTensor::zeros(&[2]).unwrap();
        assert!(matches!(op.apply(&v), Err(Error::Resource(_))));
        assert!(op.last_metrics().is_none());
    }
}
