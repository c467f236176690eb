//! Encodes a short sequence with RoI-driven QPs, round-trips the container
//! through bytes and compares against uniform coding.

use roipcc::codec::{decode_to_clouds, encode_sequence, Bitstream, PlaneConfig};
use roipcc::eval::{p2p_distance, roi_restricted_error};
use roipcc::roi::{roi_from_boxes, RoiParams};
use roipcc::synth::{generate_scene, SceneParams};

fn main() -> roipcc::Result<()> {
    let scene = generate_scene(9, &SceneParams { frames: 3, ..SceneParams::default() })?;
    let clouds: Vec<_> = scene.frames.iter().map(|f| f.cloud.clone()).collect();
    let masks = scene
        .frames
        .iter()
        .map(|f| roi_from_boxes(&f.cloud, &f.boxes, &RoiParams::default()))
        .collect::<roipcc::Result<Vec<_>>>()?;
    let plane = PlaneConfig::default();

    for (name, enc) in [
        ("roi 20/45", encode_sequence(&clouds, Some(&masks), 20, 45, &plane)?),
        ("uniform 45", encode_sequence(&clouds, None, 45, 45, &plane)?),
        ("uniform 20", encode_sequence(&clouds, None, 20, 20, &plane)?),
    ] {
        let bytes = enc.bitstream.to_bytes()?;
        let decoded = decode_to_clouds(&Bitstream::from_bytes(&bytes)?)?;
        let psnr = p2p_distance(&clouds[0], &decoded[0])?.psnr_db;
        let roi = roi_restricted_error(&clouds[0], &decoded[0], &masks[0])?;
        println!("{name:>10}: {:>9} bits, frame 0 PSNR {psnr:.2} dB, RoI MSE {roi:.3e} m²", enc.total_bits);
    }
    Ok(())
}
