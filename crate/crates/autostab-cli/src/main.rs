fn main() {
    println!("autostab");
}
