fn main() {
    println!("renorm cli placeholder");
}
