//! `celm wundt`: tabulate a hedonic curve as CSV for plotting.

use std::fmt::Write as _;
use std::path::Path;

use celm_core::arousal::{wundt_argmax, wundt_hedonic, WundtParams};

use super::{write_file, CliError};

pub fn cmd_wundt(out: &Path, points: usize, params: &WundtParams) -> Result<(), CliError> {
    if points < 2 {
        return Err(CliError::usage("--points must be at least 2"));
    }
    // Invalid parameter values surface here, as a usage error.
    let peak_stim = wundt_argmax(params).map_err(CliError::usage)?;
    let peak_idx = (peak_stim * (points - 1) as f64).round() as usize;

    let mut csv = String::from("stimulation,hedonic,is_peak\n");
    for i in 0..points {
        let s = i as f64 / (points - 1) as f64;
        let h = wundt_hedonic(s, params).map_err(CliError::numeric)?;
        let _ = writeln!(csv, "{s:.6},{h:.12},{}", (i == peak_idx) as u8);
    }
    write_file(out, &csv)?;
    println!(
        "{} points={points} peak_stimulation={peak_stim:.3} rise_then_fall={}",
        out.display(),
        params.is_rise_then_fall()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_path(tag: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("celm-wundt-{tag}-{}.csv", std::process::id()))
    }

    #[test]
    fn writes_one_row_per_point_with_a_single_peak() {
        let path = temp_path("rows");
        cmd_wundt(&path, 101, &WundtParams::default()).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = content.lines().collect();
        assert_eq!(lines[0], "stimulation,hedonic,is_peak");
        assert_eq!(lines.len(), 102);
        let peaks = lines[1..]
            .iter()
            .filter(|l| l.ends_with(",1"))
            .count();
        assert_eq!(peaks, 1);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn rejects_degenerate_grids() {
        let err = cmd_wundt(&temp_path("one"), 1, &WundtParams::default()).unwrap_err();
        assert_eq!(err.code(), 2);
    }
}
