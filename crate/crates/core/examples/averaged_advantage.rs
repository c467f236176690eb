//! Averaged advantage between two metric/bitrate curves.

use roipcc::eval::{averaged_advantage, RateCurve, RateSample};

fn curve(points: &[(f64, f64)]) -> roipcc::Result<RateCurve> {
    RateCurve::new(points.iter().map(|&(bitrate, value)| RateSample { bitrate, value }).collect())
}

fn main() -> roipcc::Result<()> {
    let ours = curve(&[(1.0, 52.0), (2.0, 58.0), (4.0, 63.0), (8.0, 66.0)])?;
    let baseline = curve(&[(1.5, 48.0), (3.0, 55.0), (6.0, 61.0), (10.0, 64.0)])?;
    let a = averaged_advantage(&ours, &baseline, 100)?;
    println!("advantage over the shared bitrate range: {a:+.3}");
    println!("reverse direction: {:+.3}", averaged_advantage(&baseline, &ours, 100)?);
    Ok(())
}
