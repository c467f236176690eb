//! Background-QP sweep for RoI and uniform coding on a few synthetic scenes,
//! printed as CSV with the averaged advantage of the RoI curve.

use roipcc::eval::{compare, sweep, write_long_csv, Scene, SweepConfig, SweepMode};
use roipcc::synth::{generate_scene, SceneParams};
use roipcc::roi::{propagate_mask, roi_from_boxes, RoiParams, DEFAULT_PROPAGATION_RADIUS};

fn main() -> roipcc::Result<()> {
    let params = SceneParams { frames: 4, ..SceneParams::default() };
    let mut scenes = Vec::new();
    for seed in 0..3 {
        let s = generate_scene(seed, &params)?;
        let key = &s.frames[0];
        let key_mask = roi_from_boxes(&key.cloud, &key.boxes, &RoiParams::default())?;
        let masks = s
            .frames
            .iter()
            .map(|f| propagate_mask(&key_mask, &key.cloud, &key.cloud.pose, &f.cloud, &f.cloud.pose, DEFAULT_PROPAGATION_RADIUS))
            .collect::<roipcc::Result<Vec<_>>>()?;
        scenes.push(Scene {
            id: format!("synth-{seed}"),
            clouds: s.frames.into_iter().map(|f| f.cloud).collect(),
            masks,
        });
    }
    let cfg = SweepConfig::default();
    let roi = sweep(&scenes, &cfg, SweepMode::Roi)?;
    let uniform = sweep(&scenes, &cfg, SweepMode::Uniform)?;
    write_long_csv(&[("roi", &roi), ("uniform", &uniform)], std::io::stdout())?;
    let adv = compare(&roi, &uniform)?;
    eprintln!("averaged advantage: RoI MSE {:+.3e} m², PSNR {:+.3} dB", adv.roi_mse, adv.psnr_db);
    Ok(())
}
