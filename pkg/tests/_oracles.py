"""Reference values computed once with mpmath at 30 digits and frozen here.

IE_n(z): direct quadrature of (sqrt(2 pi) Gamma(n+1))^{-1} int_0^inf v^n e^{-(v+z)^2/2} dv.
F: nested quadrature of the double-integral kernel f_n(z, w) from its definition.
I2N1: scalar case of the matrix integral, pi int_0^inf r^t e^{-r^2/2 - 2 x r} dr,
keyed by (Re z, t).
"""

IE = {
    (-1, 0.5): (0.35206532676429947+0j),
    (-1, (-1.2+0.7j)): (0.16559501914887173+0.18474316012314856j),
    (-1, (2.5-1j)): (-0.023152475158409715+0.01729541517959624j),
    (-1, (3+2j)): (0.031442865883257544+0.009150068646908245j),
    (-1, -3.5): (0.00087268269504576+0j),
    (-1, (6+1j)): (9.618445636916173e-09+2.799027231840233e-09j),
    (-1, (-8+0.5j)): (-3.742092187469196e-15-4.33267397516592e-15j),
    (-1, (12-3j)): (-2.472403166444361e-31-1.9162288808685467e-30j),
    (0, 0.5): (0.3085375387259869+0j),
    (0, (-1.2+0.7j)): (0.9457572664212983-0.13000384479515445j),
    (0, (2.5-1j)): (-0.009287641819736079+0.0031380286221040117j),
    (0, (3+2j)): (0.008503141271315863-0.0021211085081531003j),
    (0, -3.5): (0.9997673709209645+0j),
    (0, (6+1j)): (1.5946950865298749e-09+2.0175686605406036e-10j),
    (0, (-8+0.5j)): (1.0000000000000004+5.594226880482821e-16j),
    (0, (12-3j)): (1.7616873110991115e-32-1.5431067492962774e-31j),
    (1, 0.5): (0.19779655740130603+0j),
    (1, (-1.2+0.7j)): (1.2095010474978216-0.6332915401259456j),
    (1, (2.5-1j)): (-0.0030713992311735276+0.00016270180460013097j),
    (1, (3+2j)): (0.0016912250530037528-0.0014928883712641804j),
    (1, -3.5): (3.5000584809184216+0j),
    (1, (6+1j)): (2.520319837909832e-10-6.209051014003797e-12j),
    (1, (-8+0.5j)): (8-0.5000000000000001j),
    (1, (12-3j)): (4.2791616636969144e-33-1.1589724990642678e-32j),
    (2, 0.5): (0.10481963001266693+0j),
    (2, (-1.2+0.7j)): (0.9769272226652611-0.868302213097382j),
    (2, (2.5-1j)): (-0.0008859227732011956-0.00017006256028492163j),
    (2, (3+2j)): (0.00022184468488812198-0.0005124467501840327j),
    (2, -3.5): (6.624986027067719+0j),
    (2, (6+1j)): (3.814706638498595e-11-6.5104058264500415e-12j),
    (2, (-8+0.5j)): (32.375-4j),
    (2, (12-3j)): (5.608309955424482e-34-8.141256250654487e-34j),
    (3, 0.5): (0.04846224746499085+0j),
    (3, (-1.2+0.7j)): (0.5913340551759891-0.7863677505694956j),
    (3, (2.5-1j)): (-0.00022884324596187235-9.935485596292017e-05j),
    (3, (3+2j)): (2.658326571072238e-07-0.00013307916349610875j),
    (3, -3.5): (8.89583652521848+0j),
    (3, (6+1j)): (5.546393218205824e-12-1.7645608134298326e-12j),
    (3, (-8+0.5j)): (88.33333333333333-16.229166666666668j),
    (3, (12-3j)): (5.905365548067652e-35-5.48565865296155e-35j),
    (5, 0.5): (0.007677736835993883+0j),
    (5, (-1.2+0.7j)): (0.10852534350972698-0.3305886644798603j),
    (5, (2.5-1j)): (-1.1435240583700471e-05-1.1779128016827067e-05j),
    (5, (3+2j)): (-4.554254958258055e-06-5.043579940191905e-06j),
    (5, -3.5): (8.387239731476866+0j),
    (5, (6+1j)): (1.045630567409679e-13-6.728922657896444e-14j),
    (5, (-8+0.5j)): (305.5875-92.71901041666666j),
    (5, (12-3j)): (4.247083280429119e-37-1.5606112984820005e-37j),
}
F = {
    (0, (0.3+1.1j), (0.3-1.1j)): 0.04800266795324045j,
    (0, (-0.7+0.4j), (1.2+0.9j)): (-0.0722947508319454+0.12200908521211586j),
    (0, (1.5+2j), (-0.5+0.25j)): (0.06802061771825393-0.04299981017887004j),
    (1, (0.3+1.1j), (0.3-1.1j)): 0.03454474749337307j,
    (1, (-0.7+0.4j), (1.2+0.9j)): (0.05296789765520587+0.029382156144769297j),
    (1, (1.5+2j), (-0.5+0.25j)): (-0.045915799016449446-0.027019456497394633j),
    (2, (0.3+1.1j), (0.3-1.1j)): 0.0832057810932327j,
    (2, (-0.7+0.4j), (1.2+0.9j)): (0.11893819125150551+0.22958934963638344j),
    (2, (1.5+2j), (-0.5+0.25j)): (-0.004694061226578088-0.013717130149809041j),
}
I2N1 = {
    (0.3, 0): 2.5856181460511563,
    (0.3, 1): 1.5902217659590996,
    (0.3, 2): 1.6314850864756965,
    (-0.8, 0): 26.770765023052324,
    (-0.8, 1): 45.97481669047352,
    (-0.8, 2): 100.33047172780995,
}
