#pragma once

#include "spseg/image.hpp"

namespace spseg::testing {

// Produced by tests/oracles/lab_reference.py, an independent converter
// written from the published sRGB and CIELAB formulas.
struct LabSample {
    spseg::Rgb rgb;
    spseg::Lab lab;
};

inline constexpr LabSample kLabReference[] = {
    {{0.7918, 0.5809, 0.4149}, {65.595227, 15.132041, 30.270903}},
    {{0.9470, 0.1427, 0.4641}, {53.377790, 76.830366, 7.372413}},
    {{0.5987, 0.5407, 0.7909}, {60.897007, 19.135323, -30.988880}},
    {{0.7320, 0.3610, 0.1481}, {49.890664, 34.590364, 46.809034}},
    {{0.7481, 0.9736, 0.9536}, {93.807209, -19.048760, -3.467352}},
    {{0.7922, 0.0476, 0.1894}, {42.830172, 66.934733, 34.792787}},
    {{0.5978, 0.0080, 0.7082}, {37.990459, 71.227879, -55.121765}},
    {{0.3549, 0.0408, 0.1531}, {18.241698, 36.519217, 4.819690}},
    {{0.2404, 0.0227, 0.5011}, {18.713451, 48.198103, -54.870142}},
    {{0.6264, 0.0945, 0.1534}, {34.504337, 53.362082, 28.575590}},
    {{0.9245, 0.6736, 0.1697}, {74.436630, 12.900943, 69.315185}},
    {{0.2490, 0.0032, 0.8483}, {29.572730, 70.866871, -90.321261}},
    {{0.4071, 0.2361, 0.6719}, {36.248326, 43.145076, -52.769897}},
    {{0.8962, 0.9644, 0.2974}, {92.999418, -26.177164, 75.538751}},
    {{0.2492, 0.5359, 0.4398}, {51.882432, -29.085333, 6.256639}},
    {{0.3418, 0.8851, 0.0865}, {79.795066, -67.981300, 74.964512}},
    {{0.7901, 0.2698, 0.2942}, {48.545014, 52.908155, 25.704988}},
    {{0.6870, 0.6615, 0.0712}, {67.604895, -12.669569, 67.527893}},
    {{0.2576, 0.1243, 0.5958}, {25.039981, 45.767393, -59.501256}},
    {{0.4329, 0.9931, 0.6083}, {89.909758, -59.436416, 35.599091}},
};

}  // namespace spseg::testing
