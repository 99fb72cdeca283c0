//! Bessel functions of the first kind by Miller's algorithm: downward
//! recurrence from a start order safely above max(order, argument), then
//! normalization through J₀(z) + 2·Σ J₂ₖ(z) = 1. Stable for the large
//! arguments the sideband predictor needs (z = n·A/4ω_m runs into the
//! hundreds), where upward recurrence and the power series both fail.

/// J₀(z) ..= J_{j_max}(z).
pub fn bessel_j_table(z: f64, j_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; j_max + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let za = z.abs();

    let start = j_max.max(za.ceil() as usize) + (1.5 * za.sqrt()) as usize + 40;
    let mut f_next = 0.0_f64; // f_{m+1}
    let mut f_cur = 1e-300_f64; // f_m, arbitrary seed
    let mut norm = 0.0_f64; // f_0 + 2·Σ f_{2k}

    for m in (0..=start).rev() {
        if m <= j_max {
            out[m] = f_cur;
        }
        if m == 0 {
            norm += f_cur;
        } else if m % 2 == 0 {
            norm += 2.0 * f_cur;
        }
        if m > 0 {
            let f_prev = (2.0 * m as f64 / za) * f_cur - f_next;
            f_next = f_cur;
            f_cur = f_prev;
            if f_cur.abs() > 1e250 {
                let s = 1e-250;
                f_cur *= s;
                f_next *= s;
                norm *= s;
                for v in out.iter_mut() {
                    *v *= s;
                }
            }
        }
    }

    let scale = 1.0 / norm;
    for v in out.iter_mut() {
        *v *= scale;
    }
    if z < 0.0 {
        for (j, v) in out.iter_mut().enumerate() {
            if j % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}
