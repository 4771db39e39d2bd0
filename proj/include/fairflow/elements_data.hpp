#pragma once

#include <string_view>

namespace fairflow {

// Frozen periodic-table dataset; byte-identical to data/elements.csv.
// Density 0.0 marks elements with no accepted measured value.
inline constexpr std::string_view kElementsCsv =
    R"CSV(symbol,name,atomic_number,atomic_mass_u,covalent_radius_pm,density_g_cm3
H,Hydrogen,1,1.008,32,8.988e-05
He,Helium,2,4.0026,46,0.0001785
Li,Lithium,3,6.94,133,0.534
Be,Beryllium,4,9.0122,102,1.85
B,Boron,5,10.81,85,2.34
C,Carbon,6,12.011,75,2.267
N,Nitrogen,7,14.007,71,0.0012506
O,Oxygen,8,15.999,63,0.001429
F,Fluorine,9,18.998,64,0.001696
Ne,Neon,10,20.18,67,0.0008999
Na,Sodium,11,22.99,155,0.971
Mg,Magnesium,12,24.305,139,1.738
Al,Aluminium,13,26.982,126,2.7
Si,Silicon,14,28.085,116,2.3296
P,Phosphorus,15,30.974,111,1.82
S,Sulfur,16,32.06,103,2.067
Cl,Chlorine,17,35.45,99,0.003214
Ar,Argon,18,39.95,96,0.0017837
K,Potassium,19,39.098,196,0.862
Ca,Calcium,20,40.078,171,1.54
Sc,Scandium,21,44.956,148,2.989
Ti,Titanium,22,47.867,136,4.506
V,Vanadium,23,50.942,134,6.11
Cr,Chromium,24,51.996,122,7.15
Mn,Manganese,25,54.938,119,7.3
Fe,Iron,26,55.845,116,7.874
Co,Cobalt,27,58.933,111,8.86
Ni,Nickel,28,58.693,110,8.912
Cu,Copper,29,63.546,112,8.96
Zn,Zinc,30,65.38,118,7.134
Ga,Gallium,31,69.723,124,5.907
Ge,Germanium,32,72.63,121,5.323
As,Arsenic,33,74.922,121,5.776
Se,Selenium,34,78.971,116,4.809
Br,Bromine,35,79.904,114,3.122
Kr,Krypton,36,83.798,117,0.003733
Rb,Rubidium,37,85.468,210,1.532
Sr,Strontium,38,87.62,185,2.64
Y,Yttrium,39,88.906,163,4.469
Zr,Zirconium,40,91.224,154,6.52
Nb,Niobium,41,92.906,147,8.57
Mo,Molybdenum,42,95.95,138,10.2
Tc,Technetium,43,98,128,11
Ru,Ruthenium,44,101.07,125,12.1
Rh,Rhodium,45,102.91,125,12.4
Pd,Palladium,46,106.42,120,12
Ag,Silver,47,107.87,128,10.501
Cd,Cadmium,48,112.41,136,8.69
In,Indium,49,114.82,142,7.31
Sn,Tin,50,118.71,140,7.287
Sb,Antimony,51,121.76,140,6.685
Te,Tellurium,52,127.6,136,6.232
I,Iodine,53,126.9,133,4.93
Xe,Xenon,54,131.29,131,0.005887
Cs,Caesium,55,132.91,232,1.873
Ba,Barium,56,137.33,196,3.62
La,Lanthanum,57,138.91,180,6.145
Ce,Cerium,58,140.12,163,6.77
Pr,Praseodymium,59,140.91,176,6.773
Nd,Neodymium,60,144.24,174,7.007
Pm,Promethium,61,145,173,7.26
Sm,Samarium,62,150.36,172,7.52
Eu,Europium,63,151.96,168,5.243
Gd,Gadolinium,64,157.25,169,7.895
Tb,Terbium,65,158.93,168,8.229
Dy,Dysprosium,66,162.5,167,8.55
Ho,Holmium,67,164.93,166,8.795
Er,Erbium,68,167.26,165,9.066
Tm,Thulium,69,168.93,164,9.321
Yb,Ytterbium,70,173.05,170,6.965
Lu,Lutetium,71,174.97,162,9.84
Hf,Hafnium,72,178.49,152,13.3
Ta,Tantalum,73,180.95,146,16.4
W,Tungsten,74,183.84,137,19.3
Re,Rhenium,75,186.21,131,20.8
Os,Osmium,76,190.23,129,22.59
Ir,Iridium,77,192.22,122,22.56
Pt,Platinum,78,195.08,123,21.46
Au,Gold,79,196.97,124,19.282
Hg,Mercury,80,200.59,133,13.5336
Tl,Thallium,81,204.38,144,11.85
Pb,Lead,82,207.2,144,11.342
Bi,Bismuth,83,208.98,151,9.807
Po,Polonium,84,209,145,9.32
At,Astatine,85,210,147,0
Rn,Radon,86,222,142,0.00973
Fr,Francium,87,223,223,0
Ra,Radium,88,226,201,5.5
Ac,Actinium,89,227,186,10.07
Th,Thorium,90,232.04,175,11.72
Pa,Protactinium,91,231.04,169,15.37
U,Uranium,92,238.03,170,18.95
Np,Neptunium,93,237,171,20.25
Pu,Plutonium,94,244,172,19.84
Am,Americium,95,243,166,13.69
Cm,Curium,96,247,166,13.51
Bk,Berkelium,97,247,168,14.79
Cf,Californium,98,251,168,15.1
Es,Einsteinium,99,252,165,8.84
Fm,Fermium,100,257,167,0
Md,Mendelevium,101,258,173,0
No,Nobelium,102,259,176,0
Lr,Lawrencium,103,266,161,0
Rf,Rutherfordium,104,267,157,0
Db,Dubnium,105,268,149,0
Sg,Seaborgium,106,269,143,0
Bh,Bohrium,107,270,141,0
Hs,Hassium,108,269,134,0
Mt,Meitnerium,109,278,129,0
Ds,Darmstadtium,110,281,128,0
Rg,Roentgenium,111,282,121,0
Cn,Copernicium,112,285,122,0
Nh,Nihonium,113,286,136,0
Fl,Flerovium,114,289,143,0
Mc,Moscovium,115,290,162,0
Lv,Livermorium,116,293,175,0
Ts,Tennessine,117,294,165,0
Og,Oganesson,118,294,157,0
)CSV";

}  // namespace fairflow
