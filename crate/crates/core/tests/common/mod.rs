#![allow(dead_code)]

pub mod oracle;

use fbdyn::Vector;

pub fn v(x: &[f64]) -> Vector {
    Vector::new(x.to_vec()).unwrap()
}
