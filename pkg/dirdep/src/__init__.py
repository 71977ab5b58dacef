"""dirdep - kernel distance-correlation independence tests for directional data"""
