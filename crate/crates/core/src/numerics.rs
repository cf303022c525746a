//! Floating-point environment control for the long propagation loops.

/// While alive, subnormal results are flushed to zero on x86-64.
///
/// Gaussian tails decay into the subnormal range, and the implicit solve
/// spreads those values over the whole grid; subnormal arithmetic is then two
/// orders of magnitude slower. Values below 1e-308 carry no physical content.
/// The previous MXCSR state is restored on drop; other targets are untouched.
pub struct FlushSubnormals {
    #[cfg(target_arch = "x86_64")]
    saved: u32,
}

impl FlushSubnormals {
    #[allow(deprecated)]
    pub fn new() -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::{_mm_getcsr, _mm_setcsr};
            // FTZ (bit 15) and DAZ (bit 6).
            // SAFETY: SSE2 is baseline on x86-64; only the flush bits change.
            let saved = unsafe { _mm_getcsr() };
            unsafe { _mm_setcsr(saved | 0x8040) };
            FlushSubnormals { saved }
        }
        #[cfg(not(target_arch = "x86_64"))]
        {
            FlushSubnormals {}
        }
    }
}

impl Default for FlushSubnormals {
    fn default() -> Self {
        Self::new()
    }
}

impl Drop for FlushSubnormals {
    #[allow(deprecated)]
    fn drop(&mut self) {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::_mm_setcsr;
            // SAFETY: restores the value read in `new`.
            unsafe { _mm_setcsr(self.saved) };
        }
    }
}
