use telnoise::fock::{eigh, hermitize, FockDim};
use telnoise::noise::{rtn_channel, RTNParams};

fn main() {
    for r in [0.1, 1.0, 10.0] {
        for tau in [0.5, 2.0] {
            let d = FockDim::new(10).unwrap();
            let ch = rtn_channel(&RTNParams::new(r, tau).unwrap(), d);
            let j = hermitize(&ch.choi());
            let (vals, vecs) = eigh(&j);
            let mut worst = 0.0f64;
            for k in 0..j.nrows() {
                let v = vecs.column(k).clone_owned();
                let resid = (&j * &v - v.scale(vals[k])).norm();
                worst = worst.max(resid);
            }
            println!("r={r} tau={tau}: min eig {:+.3e}, worst residual {:.3e}", vals[0], worst);
        }
    }
}
