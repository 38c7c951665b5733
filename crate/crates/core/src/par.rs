//! Switch between rayon and sequential iteration at compile time.

#[cfg(feature = "parallel")]
pub(crate) use rayon::prelude::*;

/// Choose between `iter` and `par_iter`.
#[cfg(not(feature = "parallel"))]
macro_rules! maybe_par_iter {
    ($e:expr) => {
        $e.iter()
    };
}

/// Choose between `iter` and `par_iter`.
#[cfg(feature = "parallel")]
macro_rules! maybe_par_iter {
    ($e:expr) => {
        $e.par_iter()
    };
}

/// Choose between `chunks_mut` and `par_chunks_mut`.
#[cfg(not(feature = "parallel"))]
macro_rules! maybe_par_chunks_mut {
    ($e:expr, $n:expr) => {
        $e.chunks_mut($n)
    };
}

/// Choose between `chunks_mut` and `par_chunks_mut`.
#[cfg(feature = "parallel")]
macro_rules! maybe_par_chunks_mut {
    ($e:expr, $n:expr) => {
        $e.par_chunks_mut($n)
    };
}

/// Whether this build runs inner loops on rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
