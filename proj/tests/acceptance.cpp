// placeholder while the acceptance suite is under construction
