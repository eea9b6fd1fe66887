//! Writes and reads back attention and cluster sidecars plus a PNG mask.
//!
//! ```text
//! cargo run --example plane_files
//! ```

use cosod::tensor_io::{
    read_attention, read_clusters, read_mask_png, read_plane_file, write_attention, write_clusters, write_mask_png,
    PlaneData,
};
use cosod::{AttentionStack, ClusterMap, FloatPlane, Plane};

fn main() -> cosod::Result<()> {
    let dir = std::env::temp_dir().join("cosod-plane-files");
    std::fs::create_dir_all(&dir).map_err(cosod::Error::io(&dir))?;

    let heads = (0..2)
        .map(|h| FloatPlane::from_fn(4, 6, |r, c| ((r * 6 + c + h) % 8) as f32 / 8.0))
        .collect::<cosod::Result<Vec<_>>>()?;
    let stack = AttentionStack::new(heads)?;
    let clusters = ClusterMap::new(Plane::from_fn(4, 6, |r, _| if r < 2 { 0 } else { 3 })?);

    let attn_path = dir.join("demo.attn.plane");
    let clus_path = dir.join("demo.clus.plane");
    let mask_path = dir.join("demo.gt.png");
    write_attention(&stack, &attn_path)?;
    write_clusters(&clusters, &clus_path)?;
    write_mask_png(&clusters.category_mask(3), &mask_path)?;

    assert_eq!(read_attention(&attn_path)?, stack);
    assert_eq!(read_clusters(&clus_path)?, clusters);
    let mask = read_mask_png(&mask_path)?;

    match read_plane_file(&attn_path)? {
        PlaneData::Float(planes) => {
            println!("{}: {} float planes of {:?}", attn_path.display(), planes.len(), planes[0].dims())
        }
        PlaneData::Int(_) => unreachable!(),
    }
    println!("{}: categories {:?}", clus_path.display(), clusters.categories());
    println!("{}: {} foreground pixels", mask_path.display(), mask.count());
    Ok(())
}
