// Even Taylor coefficients of the Riemann-Siegel kernel about p = 1/2.
pub(crate) const PSI_EVEN: [f64; 46] = [
    3.8268343236508977173e-1,
    1.7489618723100817974,
    2.1180252076854963732,
    -8.7072166705114807392e-1,
    -3.4733112243465167073,
    -1.6626947308999324496,
    1.2167312889192321345,
    1.3014304161007975773,
    3.0511021827361672421e-2,
    -3.7558030515450952428e-1,
    -1.0857844165640659744e-1,
    5.1832902999549623376e-2,
    2.999948061990227592e-2,
    -2.275939670612564226e-3,
    -4.3826474165803383059e-3,
    -4.0642301837298469931e-4,
    4.0060977854221139279e-4,
    8.9710579913888412978e-5,
    -2.3025650027239107116e-5,
    -9.3800066019067924847e-6,
    6.3235149476091075042e-7,
    6.5510228192315016662e-7,
    2.2105237455526972587e-8,
    -3.322316176445628835e-8,
    -3.7349109899336560818e-9,
    1.2445067060797739195e-9,
    2.4768205376502191843e-10,
    -3.2842728168916271945e-11,
    -1.1305406852298403678e-11,
    4.5654639795886939276e-13,
    3.9598480945249215196e-13,
    7.8495662212596173171e-15,
    -1.1059043150991233194e-14,
    -7.7385439876415083171e-16,
    2.4857755550271372185e-16,
    3.0514797188827217917e-17,
    -4.4142978877933027946e-18,
    -8.6313888781884111421e-19,
    5.701292196843231018e-20,
    1.9529640164217530844e-20,
    -3.37076671224145995e-22,
    -3.6794598623776445978e-22,
    -7.3118586412806196688e-24,
    5.8691411527218040678e-24,
    3.1340669748687422231e-25,
    -7.7126264210385243338e-26,
];
