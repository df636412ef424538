use std::time::Instant;
use tev2d::coeffs::Preset;
use tev2d::mesh::disk_mesh_max_h;
use tev2d::te::fourth::FourthOrderPencil;

#[test]
fn probe_fourth_order_cost() {
    let eps = 1.0 / 5.0;
    let field = Preset::SinCosN.field().unwrap().rescale(eps).unwrap();
    let t0 = Instant::now();
    let mesh = disk_mesh_max_h(2.0, eps / 8.0).unwrap();
    println!("mesh: {} vertices, h = {:.4} ({:?})", mesh.num_vertices(), mesh.h, t0.elapsed());
    let t0 = Instant::now();
    let pencil = FourthOrderPencil::assemble(&mesh, &field).unwrap();
    println!("assembly+symbolic: {:?}, dofs {}", t0.elapsed(), pencil.n_dofs);
    let t0 = Instant::now();
    let lams = pencil.lambdas(4.33, 8, 30).unwrap();
    println!("one lambda solve: {:?}", t0.elapsed());
    println!("lambda_1..4 at tau=4.33: {:?}", lams.iter().take(4).map(|l| l.0).collect::<Vec<_>>());
    let t0 = Instant::now();
    let _ = pencil.lambdas(4.40, 8, 30).unwrap();
    println!("second lambda solve: {:?}", t0.elapsed());
}
