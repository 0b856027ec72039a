"""部分代数ごとの縮約常微分方程式系"""
