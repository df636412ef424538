use tev2d::mesh::disk_mesh_rings;
#[test]
fn zipper_quality() {
    for rings in [10usize, 40] {
        let m = disk_mesh_rings(2.0, rings).unwrap();
        let dr = 2.0 / rings as f64;
        // longest edge and which rings it spans
        let mut worst = (0.0_f64, 0usize, 0usize);
        for t in &m.triangles {
            for e in 0..3 {
                let a = m.vertices[t[e]];
                let b = m.vertices[t[(e + 1) % 3]];
                let len = ((a[0]-b[0]).powi(2) + (a[1]-b[1]).powi(2)).sqrt();
                if len > worst.0 {
                    worst = (len, t[e], t[(e+1)%3]);
                }
            }
        }
        let ra = {
            let v = m.vertices[worst.1];
            (v[0]*v[0]+v[1]*v[1]).sqrt()
        };
        let rb = {
            let v = m.vertices[worst.2];
            (v[0]*v[0]+v[1]*v[1]).sqrt()
        };
        println!("rings {rings}: h = {:.4} = {:.3} dr; worst edge radii ({:.3}, {:.3})", m.h, m.h / dr, ra, rb);
    }
}
