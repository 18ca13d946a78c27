//! Project a sensor-frame point into a camera and lift the pixel back.

use mff_core::geometry::{backproject_pixel, frustum_frame_for, project_point, CameraIntrinsics, RigidTransform, Vec3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k = CameraIntrinsics::new(1000.0, 1000.0, 960.0, 540.0, 1920, 1080)?;
    // camera 2.5 m above the sensor origin, looking along +x
    let cam_to_sensor = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 2.5)).compose(&RigidTransform::camera_to_sensor_axes());
    let sensor_to_cam = cam_to_sensor.inverse();

    let signal = Vec3::new(120.0, -4.0, 3.0);
    let px = project_point(&sensor_to_cam.apply(&signal), &k)?;
    println!("signal at {signal:?} lands on pixel ({:.2}, {:.2}), depth {:.2} m", px.u, px.v, px.depth);

    let back = cam_to_sensor.apply(&backproject_pixel(px.u, px.v, px.depth, &k)?);
    println!("lifted back: {back:?} (error {:.1e} m)", (back - signal).norm());

    let az = signal.y.atan2(signal.x);
    let aligned = frustum_frame_for(az).apply(&signal);
    println!("in its frustum frame the point sits on the x axis: {aligned:?}");
    Ok(())
}
