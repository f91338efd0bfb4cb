fn main() {
    let f = certarith::parse::parse("forall y <= S S 0 y <= 2").unwrap();
    let p = certarith::purify::purify(&f).unwrap();
    println!("purified: {p}");
    println!("truth: {:?}", certarith::nateval::nat_truth(&p, 100));
}
