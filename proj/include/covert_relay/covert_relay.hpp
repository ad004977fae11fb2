#ifndef COVERT_RELAY_COVERT_RELAY_HPP
#define COVERT_RELAY_COVERT_RELAY_HPP

#include "covert_relay/channel_model.hpp"
#include "covert_relay/covert_detection.hpp"
#include "covert_relay/direct_transmission.hpp"
#include "covert_relay/experiments.hpp"
#include "covert_relay/hypoexponential.hpp"
#include "covert_relay/link_layer.hpp"
#include "covert_relay/params.hpp"
#include "covert_relay/power_allocation.hpp"
#include "covert_relay/rng.hpp"

#endif  // COVERT_RELAY_COVERT_RELAY_HPP
