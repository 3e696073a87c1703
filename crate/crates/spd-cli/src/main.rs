fn main() {
    println!("spdc placeholder");
}
