//! Writes a synthetic sequence with its manifest, masks and a bitstream,
//! using the same commands as the `roipcc` binary.

use roipcc::app::{cmd_encode, cmd_roi, cmd_synth, RunConfig};
use roipcc::synth::SceneParams;

fn main() -> roipcc::Result<()> {
    let out = std::env::temp_dir().join("roipcc_synth_example");
    let manifest = cmd_synth(&out, 4, &SceneParams { frames: 12, ..SceneParams::default() })?;
    let cfg = RunConfig::default();
    let roi = cmd_roi(&manifest, &cfg, &out.join("masks"))?;
    println!("{} frames, {} key frames", roi.frames, roi.key_frames);
    let enc = cmd_encode(&manifest, Some(&out.join("masks")), &cfg, 45, &out.join("seq.rpcc"))?;
    println!("{} bits, {:.2} Mbit/s at 20 Hz", enc.total_bits, enc.bitrate_mbps);
    println!("output under {}", out.display());
    Ok(())
}
