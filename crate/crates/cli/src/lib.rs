//! Experiment driver for the semiclassical eigenfunction laboratory:
//! config parsing, sweep orchestration, CSV/PGM emission.

pub mod config;
pub mod csvio;
pub mod pipeline;
pub mod render;

pub use config::{parse_config, ExperimentConfig, GridChoice, Task, Thresholds};
pub use pipeline::{run_pipeline, Manifest};
pub use render::{render_levels, write_pgm, RasterImage};

/// Cap the global rayon pool from `SEMILAB_THREADS` when set. Returns
/// an error for unparsable values; a pool that is already initialized
/// is left as is.
pub fn init_thread_cap() -> Result<(), String> {
    match std::env::var("SEMILAB_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|e| format!("SEMILAB_THREADS={raw:?}: {e}"))?;
            if n == 0 {
                return Err("SEMILAB_THREADS must be positive".into());
            }
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
    }
}
