#pragma once

#include <array>
#include <string>

namespace obbtrack::test {

// Transcribed from the published matrix, LaTeX math markup removed.
inline const std::array<std::array<std::string, 4>, 18> kPublishedOa{{
    {"Stationary - NL - NA", "Stationary", "No", "2.5 m"},
    {"Stationary - NL - NA", "0.25 rad/s", "< 20%", "3.5 m"},
    {"Stationary - NL - NA", "0.5 rad/s", "> 40%", "4.5 m"},
    {"Stationary - PL - NA", "Stationary", "No", "3.5 m"},
    {"Stationary - PL - NA", "0.25 rad/s", "< 20%", "4.5 m"},
    {"Stationary - PL - NA", "0.5 rad/s", "> 40%", "2.5 m"},
    {"Stationary - NL - PA", "Stationary", "< 20%", "2.5 m"},
    {"Stationary - NL - PA", "0.25 rad/s", "> 40%", "3.5 m"},
    {"Stationary - NL - PA", "0.5 rad/s", "No", "4.5 m"},
    {"Stationary - PL - PA", "Stationary", "> 40%", "4.5 m"},
    {"Stationary - PL - PA", "0.25 rad/s", "No", "2.5 m"},
    {"Stationary - PL - PA", "0.5 rad/s", "< 20%", "3.5 m"},
    {"0.25 m/s", "Stationary", "< 20%", "4.5 m"},
    {"0.25 m/s", "0.25 rad/s", "> 40%", "2.5 m"},
    {"0.25 m/s", "0.5 rad/s", "No", "3.5 m"},
    {"0.5 m/s", "Stationary", "> 40%", "3.5 m"},
    {"0.5 m/s", "0.25 rad/s", "No", "4.5 m"},
    {"0.5 m/s", "0.5 rad/s", "< 20%", "2.5 m"},
}};

}  // namespace obbtrack::test
