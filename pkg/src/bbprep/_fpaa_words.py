"""Frozen minimax phase words for fixed-point amplitude reset.

Each entry is the first half of a palindromic word of (alpha, beta)
pairs; the full word appends the reversed half with the roles swapped,
which forces the two-level transfer to be exactly real with value +1 at
full initial overlap. Solved offline by annealed minimax optimization
over initial overlaps lambda in [1/2, 1]; the recorded deficits are
worst-case 1 - transfer values verified on dense grids (8001 points for
direct words, 16001 for the nested composite).
"""

# eps bound -> (half word, verified worst-case deficit)
DIRECT_HALF_WORDS = (
    (0.1, (
        (-0.2945566194821597, -2.1105985088528962),
        (1.919082472922737, 1.3914857028839218),
    ), 0.00014803377062433398),
    (0.01, (
        (-0.6311562731564881, -5.147164386740063),
        (3.9044270211250014, 4.724126523557441),
        (-2.8342292997296674, 0.39074717217041505),
    ), 3.71277763322464e-06),
    (0.001, (
        (-1.904465142530467, -2.698427683244107),
        (6.03984904733585, 5.417736487324094),
        (-4.598603430943542, 0.5610587511115899),
        (2.245013446233189, -4.095236983849802),
    ), 9.75705491956802e-08),
    (0.0001, (
        (0.13964720653535936, -2.3606090079272666),
        (1.7545808369872697, 1.599516120510337),
        (-3.2801938437399136, 0.48630391335090273),
        (0.4786443966962536, -1.1248183287577291),
        (-1.0219362568107306, -2.7272977089966886),
        (1.0689423813819874, 0.8916773108403347),
        (-1.5424025676696853, -1.6127336908014316),
    ), 2.6656519214185437e-09),
)

# Outer palindromic half wrapping the 1e-2 word as a nested composite;
# covers every smaller eps (see stateprep.fixed_point_schedule).
NESTED_INNER_EPS = 0.01
NESTED_OUTER_HALF = (
    (1.3181176697761263, -0.5053621083711218),
)
NESTED_DEFICIT = 2.886579864025407e-15
