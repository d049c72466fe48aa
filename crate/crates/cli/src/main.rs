fn main() {
    println!("pess");
}
