fn main() {
    let classes: usize = std::env::args().nth(1).map_or(10, |a| a.parse().unwrap());
    let (_, t) = qcnn::ansatz::build_qcnn(classes).unwrap();
    print!("{}", t.to_listing());
}
