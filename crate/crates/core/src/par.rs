//! Data-parallel helpers. With the `parallel` feature (default) work fans
//! out over rayon; without it, or in [`ExecMode::Sequential`], it runs in
//! order on the calling thread. Results are always in input order.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

pub fn map_indexed<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
