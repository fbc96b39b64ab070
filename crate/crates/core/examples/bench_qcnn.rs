use std::time::Instant;

use qcnn::encoding::amplitude_encode;
use qcnn::training::{init_qcnn_params, Classifier, QcnnClassifier};

fn main() {
    let model = QcnnClassifier::new(10).unwrap();
    let params = init_qcnn_params(model.num_params(), 1);
    let x: Vec<f64> = (0..256).map(|i| ((i * 37) % 101) as f64 - 50.0).collect();
    let s = amplitude_encode(&x).unwrap();
    let n = 2000;
    let t = Instant::now();
    let mut acc = 0.0;
    for i in 0..n {
        acc += model.loss_and_gradient(&params, &s, i % 10).unwrap().0;
    }
    println!("grad: {:?}/sample ({acc})", t.elapsed() / n as u32);
    let t = Instant::now();
    for _ in 0..n {
        acc += model.logits(&params, &s).unwrap()[0];
    }
    println!("fwd: {:?}/sample ({acc})", t.elapsed() / n as u32);
    println!("gates: {}", model.template.gates().len());
}
