#pragma once

#include <brainbot/analysis.hpp>
#include <brainbot/core.hpp>
#include <brainbot/io.hpp>
#include <brainbot/kinematics.hpp>
#include <brainbot/programs.hpp>
