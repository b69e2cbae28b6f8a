//! Frozen values from `tests/oracles/gain_kp_oracle.py` (mpmath, 50 digits).
#![allow(dead_code, clippy::excessive_precision)]

// (b1, b2, b3, p1, p2, c, k_p)
pub const GAIN_POINTS: [[f64; 7]; 20] = [
    [
        30.430967,
        231.295522,
        2.662605,
        0.19085,
        2.439304,
        0.856354,
        0.76128783685727973466,
    ],
    [
        16.799366,
        69.557336,
        6.812192,
        0.897202,
        1.257284,
        0.049438,
        0.58135633010445415296,
    ],
    [
        17.970511,
        89.903884,
        6.057151,
        0.220776,
        1.071726,
        0.323438,
        0.35960741963250006901,
    ],
    [
        11.822153,
        90.399521,
        4.209225,
        0.247502,
        2.947782,
        0.615587,
        0.46280726462402354675,
    ],
    [
        36.535824,
        112.383575,
        9.361551,
        0.839379,
        1.500701,
        0.703743,
        0.66771532149058956897,
    ],
    [
        47.259257,
        171.469513,
        3.766661,
        0.404452,
        2.669562,
        0.528875,
        0.12671856674662873009,
    ],
    [
        46.763937,
        205.982831,
        8.200288,
        0.675861,
        1.758526,
        0.325699,
        0.11828754642931794799,
    ],
    [
        47.957435,
        209.682354,
        4.121467,
        0.139609,
        1.836017,
        0.709853,
        0.20448844090539286399,
    ],
    [
        16.624782,
        263.697997,
        1.253259,
        0.617105,
        2.371165,
        0.061657,
        0.18946332021873204346,
    ],
    [
        33.062589,
        201.029962,
        7.166095,
        0.732854,
        2.40751,
        0.965379,
        7.3598398814463916069,
    ],
    [
        45.623658,
        100.396882,
        5.465755,
        0.943093,
        1.504158,
        0.355794,
        0.61606802266377856999,
    ],
    [
        38.616852,
        217.896632,
        4.316716,
        0.092845,
        2.535678,
        0.906627,
        1.2575465752714725334,
    ],
    [
        44.555361,
        222.94281,
        8.7213,
        0.77478,
        1.53286,
        0.618108,
        0.31211580808562352581,
    ],
    [
        22.745881,
        186.619076,
        6.22468,
        0.131434,
        2.719004,
        0.311223,
        0.10772733761828560637,
    ],
    [
        22.001196,
        112.83746,
        0.87234,
        0.258563,
        1.991263,
        0.972579,
        12.061267416475849541,
    ],
    [
        34.613982,
        55.773767,
        2.921981,
        0.104322,
        2.767778,
        0.549513,
        0.18075276966000746388,
    ],
    [
        48.170261,
        15.505226,
        4.508999,
        0.761982,
        2.587741,
        0.667,
        0.58664600576337303452,
    ],
    [
        40.536727,
        112.634418,
        8.909921,
        0.141954,
        2.394354,
        0.002634,
        0.037922250605518782273,
    ],
    [
        35.501778,
        50.223657,
        3.296261,
        0.912285,
        1.820291,
        0.900265,
        4.3946633121892625085,
    ],
    [
        29.895962,
        22.493729,
        5.995717,
        0.449987,
        2.814801,
        0.078621,
        0.089447180157334213641,
    ],
];
// b1=b2=b3=1, p1=0.5, p2=1.5, c=0
pub const GAIN_UNIT: f64 = 2.7875841310370928748;
// b1=20, b2=200, b3=0, p1=0.99, p2=1.01, r=4
pub const OMEGA_R4: f64 = 222.51655004787301345;
// b1=20, b2=200, b3->0, p1=0.99, p2=1.01, c=0.5
pub const GAIN_B3_ZERO: f64 = 11.078959109659442418;
// (b1, b2, b3, p1, p2, p3, k, z0, z1, time from z0 to z1)
pub const SCALAR_SETTLING: [[f64; 10]; 3] = [
    [
        20.0,
        200.0,
        0.0,
        0.9,
        1.1,
        0.0,
        1.0,
        4.0,
        1e-06,
        0.20430943055951711826,
    ],
    [
        1.0,
        1.0,
        5.0,
        0.5,
        1.5,
        0.5,
        1.0,
        10.0,
        1e-06,
        1.2077488406411037704,
    ],
    [
        2.0,
        3.0,
        1.0,
        0.7,
        1.3,
        1.0,
        1.0,
        5.0,
        0.001,
        1.0236398564411902848,
    ],
];
