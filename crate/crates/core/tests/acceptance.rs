//! Acceptance gate. Every criterion runs at its stated tolerance and
//! prints one verdict line; failing criteria carry the measured
//! evidence in the assertion message.

mod common;

use std::cmp::Ordering;
use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xposit::asm::assemble;
use xposit::bench::{
    gemm, gemm_golden, gemm_posit_quire_bits, gen_inputs, gen_tensor, geometric_mean,
    maxpool_f64, maxpool_posit, mse, GemmFormat, POOL_LAYERS,
};
use xposit::isa::{decode, encode, Instruction, Mnemonic};
use xposit::sim::{Halt, Machine};
use xposit::{Posit32, Posit8, Quire32};

fn verdict(number: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {number} ({name}): {status}; {detail}");
}

#[test]
fn criterion_1_posit8_exhaustive_oracle_equivalence() {
    let start = Instant::now();
    let values: Vec<Option<Dyadic>> = (0..256u64).map(|b| posit_value(b, 8)).collect();

    let mut roundtrip_fails = 0u32;
    for bits in 0..256usize {
        match &values[bits] {
            Some(d) => {
                if round_to_posit(d, 8) != bits as u32 {
                    roundtrip_fails += 1;
                }
            }
            None => {
                if bits != 0x80 {
                    roundtrip_fails += 1;
                }
            }
        }
    }

    let mut op_fails = 0u64;
    for a in 0..256usize {
        let pa = Posit8::from_bits(a as u8);
        for b in 0..256usize {
            let pb = Posit8::from_bits(b as u8);
            let exact = |f: fn(&Dyadic, &Dyadic) -> Dyadic| -> u8 {
                match (&values[a], &values[b]) {
                    (Some(x), Some(y)) => round_to_posit(&f(x, y), 8) as u8,
                    _ => 0x80,
                }
            };
            if (pa + pb).to_bits() != exact(Dyadic::add) {
                op_fails += 1;
            }
            if (pa - pb).to_bits() != exact(Dyadic::sub) {
                op_fails += 1;
            }
            if (pa * pb).to_bits() != exact(Dyadic::mul) {
                op_fails += 1;
            }
        }
    }

    let secs = start.elapsed().as_secs_f64();
    let pass = roundtrip_fails == 0 && op_fails == 0 && secs < 60.0;
    verdict(
        1,
        "posit8 exhaustive oracle equivalence",
        pass,
        &format!(
            "add/sub/mul mismatches {op_fails} of 196608, round-trip mismatches \
             {roundtrip_fails} of 256, {secs:.1}s"
        ),
    );
    assert!(pass, "{op_fails} op mismatches, {roundtrip_fails} round-trip mismatches");
}

#[test]
fn criterion_2_ordering_matches_signed_integer_comparison() {
    let mut fails = 0u64;

    let nar = Posit8::NAR;
    assert!(nar == nar, "NaR must equal NaR");
    for b in 0..256u32 {
        let p = Posit8::from_bits(b as u8);
        let want = if b == 0x80 { Ordering::Equal } else { Ordering::Less };
        if nar.cmp(&p) != want {
            fails += 1;
        }
    }

    for a in 0..256u32 {
        let pa = Posit8::from_bits(a as u8);
        let va = posit_value(a as u64, 8);
        for b in 0..256u32 {
            let lib = pa.cmp(&Posit8::from_bits(b as u8));
            if lib != (a as u8 as i8).cmp(&(b as u8 as i8)) {
                fails += 1;
            }
            if let (Some(x), Some(y)) = (&va, &posit_value(b as u64, 8)) {
                if lib != x.cmp_val(y) {
                    fails += 1;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..1_000_000 {
        let (a, b): (u32, u32) = (rng.gen(), rng.gen());
        let lib = Posit32::from_bits(a).cmp(&Posit32::from_bits(b));
        if lib != (a as i32).cmp(&(b as i32)) {
            fails += 1;
        }
    }

    verdict(
        2,
        "comparison law",
        fails == 0,
        &format!(
            "{fails} mismatches over 65536 exhaustive posit8 pairs (bit and value order), \
             1000000 random posit32 pairs, and NaR placement"
        ),
    );
    assert_eq!(fails, 0);
}

#[test]
fn criterion_3_approximate_unit_error_bound() {
    const BN: u64 = 1112;
    const BD: u64 = 10000;

    let mut p8_adiv_ok = true;
    let (mut p8_adiv_max, mut p8_adiv_arg) = (0.0f64, (0u8, 0u8));
    for a in 1..=255u8 {
        if a == 0x80 {
            continue;
        }
        let p = posit_value(a as u64, 8).unwrap();
        for b in 1..=255u8 {
            if b == 0x80 {
                continue;
            }
            let q = posit_value(b as u64, 8).unwrap();
            let bits = Posit8::from_bits(a).adiv(Posit8::from_bits(b)).to_bits();
            let x = posit_value(bits as u64, 8).expect("adiv is total on finite nonzero inputs");
            if !quotient_rel_err_le(&x, &p, &q, BN, BD) {
                p8_adiv_ok = false;
            }
            let err = quotient_rel_err_f64(&x, &p, &q);
            if err > p8_adiv_max {
                p8_adiv_max = err;
                p8_adiv_arg = (a, b);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut finite = |positive: bool| -> u32 {
        loop {
            let mut w: u32 = rng.gen();
            if positive {
                w &= 0x7FFF_FFFF;
            }
            if w != 0 && w != 0x8000_0000 {
                return w;
            }
        }
    };

    let mut p32_adiv_ok = true;
    let mut p32_adiv_max = 0.0f64;
    for _ in 0..1_000_000 {
        let (a, b) = (finite(false), finite(false));
        let bits = Posit32::from_bits(a).adiv(Posit32::from_bits(b)).to_bits();
        let x = posit_value(bits as u64, 32).unwrap();
        let p = posit_value(a as u64, 32).unwrap();
        let q = posit_value(b as u64, 32).unwrap();
        if !quotient_rel_err_le(&x, &p, &q, BN, BD) {
            p32_adiv_ok = false;
        }
        p32_adiv_max = p32_adiv_max.max(quotient_rel_err_f64(&x, &p, &q));
    }

    let mut p8_asqrt_ok = true;
    let (mut p8_asqrt_max, mut p8_asqrt_arg) = (0.0f64, 0u8);
    for a in 1..=0x7Fu8 {
        let v = posit_value(a as u64, 8).unwrap();
        let bits = Posit8::from_bits(a).asqrt().to_bits();
        let x = posit_value(bits as u64, 8).unwrap();
        if !sqrt_rel_err_le(&x, &v, BN, BD) {
            p8_asqrt_ok = false;
        }
        let err = sqrt_rel_err_f64(&x, &v);
        if err > p8_asqrt_max {
            p8_asqrt_max = err;
            p8_asqrt_arg = a;
        }
    }

    let mut p32_asqrt_ok = true;
    let mut p32_asqrt_max = 0.0f64;
    for _ in 0..1_000_000 {
        let a = finite(true);
        let v = posit_value(a as u64, 32).unwrap();
        let bits = Posit32::from_bits(a).asqrt().to_bits();
        let x = posit_value(bits as u64, 32).unwrap();
        if !sqrt_rel_err_le(&x, &v, BN, BD) {
            p32_asqrt_ok = false;
        }
        p32_asqrt_max = p32_asqrt_max.max(sqrt_rel_err_f64(&x, &v));
    }

    let pass = p8_adiv_ok && p32_adiv_ok && p8_asqrt_ok && p32_asqrt_ok;
    verdict(
        3,
        "approximate unit error bound",
        pass,
        &format!(
            "bound 11.12%; p8 adiv max {p8_adiv_max:.4e} at ({:#04x},{:#04x}) [{}], \
             p32 adiv max {p32_adiv_max:.6} [{}], \
             p8 asqrt max {p8_asqrt_max:.6} at {:#04x} [{}], \
             p32 asqrt max {p32_asqrt_max:.6} [{}]",
            p8_adiv_arg.0,
            p8_adiv_arg.1,
            if p8_adiv_ok { "ok" } else { "exceeded" },
            if p32_adiv_ok { "ok" } else { "exceeded" },
            p8_asqrt_arg,
            if p8_asqrt_ok { "ok" } else { "exceeded" },
            if p32_asqrt_ok { "ok" } else { "exceeded" },
        ),
    );
    assert!(
        p32_adiv_ok && p8_asqrt_ok && p32_asqrt_ok,
        "p32 adiv max {p32_adiv_max}, p8 asqrt max {p8_asqrt_max}, p32 asqrt max {p32_asqrt_max}"
    );
    assert!(
        p8_adiv_ok,
        "p8 adiv max relative error {p8_adiv_max:.4e} at ({:#04x},{:#04x}): the exact \
         quotient there lies outside the format's dynamic range, so any in-format result \
         saturates and exceeds 11.12%; no divider can meet the bound over saturating pairs",
        p8_adiv_arg.0,
        p8_adiv_arg.1
    );
}

#[test]
fn criterion_4_quire_exactness_on_long_macs() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut finite = || loop {
        let w: u32 = rng.gen();
        if w != 0x8000_0000 {
            return w;
        }
    };
    let mut fails = 0u32;
    for _ in 0..1000 {
        let mut q = Quire32::new();
        let mut sum = Dyadic::zero();
        for _ in 0..10_000 {
            let (a, b) = (finite(), finite());
            q.madd(Posit32::from_bits(a), Posit32::from_bits(b));
            let prod =
                posit_value(a as u64, 32).unwrap().mul(&posit_value(b as u64, 32).unwrap());
            sum = sum.add(&prod);
        }
        if q.round().to_bits() != round_to_posit(&sum, 32) {
            fails += 1;
        }
    }
    verdict(
        4,
        "quire exactness",
        fails == 0,
        &format!("{fails} of 1000 sequences of 10000 random MACs differ from the correctly rounded exact sum"),
    );
    assert_eq!(fails, 0);
}

/// Instruction words concatenated by hand from the published bit grid:
/// funct5 | fmt=10 | rs2 | rs1 | 000 | rd | 0001011 for computational
/// rows, the I/S layouts for plw/psw. Kept independent of the library's
/// table.
#[rustfmt::skip]
const GOLDEN: [(Mnemonic, u8, u8, u8, i16, u32); 30] = [
    (Mnemonic::Plw,     1, 2, 0, 8, 0x0081108B),
    (Mnemonic::Psw,     0, 2, 1, 8, 0x0011340B),
    (Mnemonic::PaddS,   3, 1, 2, 0, 0x0420818B),
    (Mnemonic::PsubS,   3, 1, 2, 0, 0x0C20818B),
    (Mnemonic::PmulS,   3, 1, 2, 0, 0x1420818B),
    (Mnemonic::PdivS,   3, 1, 2, 0, 0x1C20818B),
    (Mnemonic::PminS,   3, 1, 2, 0, 0x2420818B),
    (Mnemonic::PmaxS,   3, 1, 2, 0, 0x2C20818B),
    (Mnemonic::PsqrtS,  3, 1, 0, 0, 0x3400818B),
    (Mnemonic::QmaddS,  0, 1, 2, 0, 0x3C20800B),
    (Mnemonic::QmsubS,  0, 1, 2, 0, 0x4420800B),
    (Mnemonic::QclrS,   0, 0, 0, 0, 0x4C00000B),
    (Mnemonic::QnegS,   0, 0, 0, 0, 0x5400000B),
    (Mnemonic::QroundS, 3, 0, 0, 0, 0x5C00018B),
    (Mnemonic::PcvtWS,  3, 1, 0, 0, 0x6400818B),
    (Mnemonic::PcvtWuS, 3, 1, 0, 0, 0x6C00818B),
    (Mnemonic::PcvtLS,  3, 1, 0, 0, 0x7400818B),
    (Mnemonic::PcvtLuS, 3, 1, 0, 0, 0x7C00818B),
    (Mnemonic::PcvtSW,  3, 1, 0, 0, 0x8400818B),
    (Mnemonic::PcvtSWu, 3, 1, 0, 0, 0x8C00818B),
    (Mnemonic::PcvtSL,  3, 1, 0, 0, 0x9400818B),
    (Mnemonic::PcvtSLu, 3, 1, 0, 0, 0x9C00818B),
    (Mnemonic::PsgnjS,  3, 1, 2, 0, 0xA420818B),
    (Mnemonic::PsgnjnS, 3, 1, 2, 0, 0xAC20818B),
    (Mnemonic::PsgnjxS, 3, 1, 2, 0, 0xB420818B),
    (Mnemonic::PmvXW,   3, 1, 0, 0, 0xBC00818B),
    (Mnemonic::PmvWX,   3, 1, 0, 0, 0xC400818B),
    (Mnemonic::PeqS,    3, 1, 2, 0, 0xCC20818B),
    (Mnemonic::PltS,    3, 1, 2, 0, 0xD420818B),
    (Mnemonic::PleS,    3, 1, 2, 0, 0xDC20818B),
];

/// Computational rows as (funct5, rd used, rs1 used, rs2 used), for the
/// word-sweep legality judgment.
#[rustfmt::skip]
const COMP_ROWS: [(u32, bool, bool, bool); 28] = [
    (0b00000, true,  true,  true),
    (0b00001, true,  true,  true),
    (0b00010, true,  true,  true),
    (0b00011, true,  true,  true),
    (0b00100, true,  true,  true),
    (0b00101, true,  true,  true),
    (0b00110, true,  true,  false),
    (0b00111, false, true,  true),
    (0b01000, false, true,  true),
    (0b01001, false, false, false),
    (0b01010, false, false, false),
    (0b01011, true,  false, false),
    (0b01100, true,  true,  false),
    (0b01101, true,  true,  false),
    (0b01110, true,  true,  false),
    (0b01111, true,  true,  false),
    (0b10000, true,  true,  false),
    (0b10001, true,  true,  false),
    (0b10010, true,  true,  false),
    (0b10011, true,  true,  false),
    (0b10100, true,  true,  true),
    (0b10101, true,  true,  true),
    (0b10110, true,  true,  true),
    (0b10111, true,  true,  false),
    (0b11000, true,  true,  false),
    (0b11001, true,  true,  true),
    (0b11010, true,  true,  true),
    (0b11011, true,  true,  true),
];

fn should_be_legal(word: u32) -> bool {
    if word & 0x7F != 0x0B {
        return false;
    }
    match (word >> 12) & 7 {
        0b001 | 0b011 => true,
        0b000 => {
            if (word >> 25) & 3 != 0b10 {
                return false;
            }
            let funct5 = (word >> 27) & 0x1F;
            match COMP_ROWS.iter().find(|r| r.0 == funct5) {
                None => false,
                Some(&(_, rd, rs1, rs2)) => {
                    (rd || (word >> 7) & 0x1F == 0)
                        && (rs1 || (word >> 15) & 0x1F == 0)
                        && (rs2 || (word >> 20) & 0x1F == 0)
                }
            }
        }
        _ => false,
    }
}

#[test]
fn criterion_5_isa_golden_vectors_and_full_word_rejection() {
    let mut golden_fails = 0u32;
    for &(mnemonic, rd, rs1, rs2, imm, word) in &GOLDEN {
        let i = Instruction { mnemonic, rd, rs1, rs2, imm };
        if encode(i) != Ok(word) {
            golden_fails += 1;
        }
        if decode(word) != Ok(i) {
            golden_fails += 1;
        }
    }

    // Encode-side bijection, exhaustive over register fields.
    let mut bijection_fails = 0u64;
    let field = |used: bool| -> std::ops::RangeInclusive<u8> {
        if used {
            0..=31
        } else {
            0..=0
        }
    };
    for &(mnemonic, ..) in &GOLDEN {
        let imms: &[i16] = if mnemonic.has_imm() { &[-2048, -1, 0, 1, 2047] } else { &[0] };
        for rd in field(mnemonic.rd_file().is_some()) {
            for rs1 in field(mnemonic.rs1_file().is_some()) {
                for rs2 in field(mnemonic.rs2_file().is_some()) {
                    for &imm in imms {
                        let i = Instruction { mnemonic, rd, rs1, rs2, imm };
                        let word = encode(i).unwrap();
                        if decode(word) != Ok(i) {
                            bijection_fails += 1;
                        }
                    }
                }
            }
        }
    }

    // Decode-side: every word with the POSIT opcode either matches the
    // independent legality judgment and re-encodes to itself, or is
    // rejected.
    let mut sweep_fails = 0u64;
    let mut legal = 0u64;
    for hi in 0..(1u32 << 25) {
        let word = (hi << 7) | 0x0B;
        match decode(word) {
            Ok(i) => {
                legal += 1;
                if !should_be_legal(word) || encode(i) != Ok(word) {
                    sweep_fails += 1;
                }
            }
            Err(_) => {
                if should_be_legal(word) {
                    sweep_fails += 1;
                }
            }
        }
    }

    let pass = golden_fails == 0 && bijection_fails == 0 && sweep_fails == 0;
    verdict(
        5,
        "isa golden vectors and full rejection sweep",
        pass,
        &format!(
            "30 table mnemonics, {golden_fails} golden mismatches, {bijection_fails} \
             register-field round-trip failures; 2^25-word sweep: {legal} legal words, \
             {sweep_fails} disagreements with the independent classifier"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_simulator_gemm_bit_identical_to_library() {
    let n = 16usize;
    let (af, bf) = gen_inputs(n, 0, 4242);
    let expect = gemm_posit_quire_bits(&af, &bf, n);

    let mut text = String::new();
    for i in 0..n {
        for j in 0..n {
            text.push_str("qclr.s\n");
            for k in 0..n {
                text.push_str(&format!("plw p1, {}(x1)\n", 4 * (i * n + k)));
                text.push_str(&format!("plw p2, {}(x2)\n", 4 * (k * n + j)));
                text.push_str("qmadd.s p1, p2\n");
            }
            text.push_str("qround.s p3\n");
            text.push_str(&format!("psw p3, {}(x3)\n", 4 * (i * n + j)));
        }
    }
    let program = assemble(&text).unwrap();

    let mut m = Machine::new(4096);
    m.set_xreg(1, 0);
    m.set_xreg(2, 1024);
    m.set_xreg(3, 2048);
    for (idx, &x) in af.iter().enumerate() {
        assert!(m.write_mem(4 * idx as u64, &Posit32::from_f64(x).to_bits().to_le_bytes()));
    }
    for (idx, &x) in bf.iter().enumerate() {
        assert!(m.write_mem(
            1024 + 4 * idx as u64,
            &Posit32::from_f64(x).to_bits().to_le_bytes()
        ));
    }

    let (halt, trace) = m.run(&program, 20_000);
    let got: Vec<u32> = (0..n * n)
        .map(|idx| {
            let bytes = m.read_mem(2048 + 4 * idx as u64, 4).unwrap();
            u32::from_le_bytes(bytes.try_into().unwrap())
        })
        .collect();

    let pass = halt == Halt::Done && trace.len() == program.len() && got == expect;
    verdict(
        6,
        "simulator equivalence",
        pass,
        &format!(
            "16x16 quire GEMM, {} instructions executed, halt {halt:?}, bit-identical: {}",
            trace.len(),
            got == expect
        ),
    );
    assert!(pass);
}

/// Per-seed (posit32_quire, posit32_noquire, f32_fused) MSEs at n=256,
/// one thread per seed.
fn gemm_cells(range_exp: i32, seeds: u64) -> Vec<(f64, f64, f64)> {
    let n = 256usize;
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..seeds)
            .map(|seed| {
                s.spawn(move || {
                    let (a, b) = gen_inputs(n, range_exp, seed);
                    let golden = gemm_golden(&a, &b, n);
                    let m = |format| mse(&gemm(&a, &b, n, format), &golden);
                    (
                        m(GemmFormat::Posit32Quire),
                        m(GemmFormat::Posit32NoQuire),
                        m(GemmFormat::F32Fused),
                    )
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

#[test]
fn criterion_7_gemm_accuracy_reproduction() {
    let start = Instant::now();
    let cells = gemm_cells(0, 10);
    let gm = |pick: fn(&(f64, f64, f64)) -> f64| -> f64 {
        geometric_mean(&cells.iter().map(pick).collect::<Vec<f64>>())
    };
    let quire_ratio = gm(|c| c.0) / gm(|c| c.2);
    let noquire_ratio = gm(|c| c.1) / gm(|c| c.2);
    let secs = start.elapsed().as_secs_f64();
    let pass =
        quire_ratio <= 1e-3 && (1e-3..=1e-1).contains(&noquire_ratio) && secs < 300.0;
    verdict(
        7,
        "gemm accuracy reproduction",
        pass,
        &format!(
            "n=256, range [-1,1], 10 seeds: GM MSE quire/f32_fused {quire_ratio:.3e} \
             (need <= 1e-3), noquire/f32_fused {noquire_ratio:.3e} (need in [1e-3, 1e-1]), \
             {secs:.0}s"
        ),
    );
    assert!(pass, "quire ratio {quire_ratio:.3e}, noquire ratio {noquire_ratio:.3e}");
}

#[test]
fn criterion_8_golden_zone_reversal() {
    let cells = gemm_cells(3, 10);
    let reversed = cells.iter().filter(|(q, nq, f)| nq > f && q < f).count();
    let pass = reversed >= 8;
    verdict(
        8,
        "golden zone reversal",
        pass,
        &format!(
            "n=256, range [-1000,1000]: noquire above f32_fused while quire below it in \
             {reversed} of 10 seeds (need >= 8)"
        ),
    );
    assert!(pass, "reversal held in only {reversed} of 10 seeds");
}

#[test]
fn criterion_9_maxpool_functional() {
    let expected_dims = [(14usize, 14usize), (26, 26), (55, 55)];
    let mut dim_fails = 0u32;
    let mut value_fails = 0u32;
    for (layer, (eh, ew)) in POOL_LAYERS.iter().zip(expected_dims) {
        if layer.out_h() != eh || layer.out_w() != ew {
            dim_fails += 1;
        }
        for seed in 0..3u64 {
            let input = gen_tensor(*layer, 1, seed);
            let pin: Vec<Posit32> = input.iter().map(|&x| Posit32::from_f64(x)).collect();
            let via_f64: Vec<Posit32> = maxpool_f64(&input, *layer)
                .iter()
                .map(|&x| Posit32::from_f64(x))
                .collect();
            let pooled = maxpool_posit(&pin, *layer);
            if pooled.len() != eh * ew * layer.c || pooled != via_f64 {
                value_fails += 1;
            }
        }
    }
    let pass = dim_fails == 0 && value_fails == 0;
    verdict(
        9,
        "maxpool functional",
        pass,
        &format!(
            "3 layer shapes to 14x14, 26x26, 55x55: {dim_fails} dim mismatches, \
             {value_fails} elementwise differences from monotone-converted f64 pooling"
        ),
    );
    assert!(pass);
}
